//! Reductions between deciders for `(Y^t_c, N_e)` and eavesdroppers.
//!
//! * [`decider`]: verdicts, promise parameters, the exact reference decider,
//!   majority amplification and subprocess plugins.
//! * [`embed`]: hash embedding in transcripts and the breaker predicate `E`.
//! * [`leakage`]: the `E(pi, x)` against `E(pi, U)` experiment.
//! * [`eve`]: the Eve-driven decider and the sets `S_{n,l}`.
//! * [`gl`]: Goldreich–Levin predictor, list decoding and pipeline.

pub mod decider;
pub mod embed;
pub mod eve;
pub mod gl;
pub mod leakage;

pub use decider::{
    reference_decider, ConstDecider, Decider, FnDecider, Majority, PromiseParams, ReferenceDecider, SubprocessDecider,
    Verdict,
};
pub use embed::{breaker_e, embed_transcript, parse_embedding, sample_breaker, BreakerConfig, Parity};
pub use eve::{count_s, eve_decider, Eve, FixedEve, PosteriorEve, RandomEve};
pub use gl::{key_recovery_pipeline, gl_list_decode, gl_next_bit_predictor, Distinguisher, NoisyOracle, ParityOracle};
pub use leakage::{leakage_experiment, LeakageReport, ToyDhKeyDecider};
