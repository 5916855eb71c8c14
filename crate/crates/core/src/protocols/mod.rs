//! Two-party protocols that alternately exchange single bits.
//!
//! A protocol fixes, for each input size `n`, the number of random bits each
//! side reads and a deterministic strategy per side. Alice moves first. A side
//! that has finished stays silent; before each later bit of its partner a 0 is
//! written in its place, so Alice owns the even transcript positions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitcore::BitString;
use crate::error::{Error, Result};
use crate::seed::{derive, rng_from, streams};
use crate::stats::BinomialEstimate;
use crate::toyvm::Side;

pub mod checks;
pub mod levin;
pub mod simple;
pub mod toydh;

pub use checks::{check_dh_like, check_standard, transcript_entropy, DhVerdict, DomainKind, StandardReport};
pub use levin::LevinSearch;
pub use simple::{Coinflip, Null, Transparent, ZeroMask};
pub use toydh::ToyDh;

/// One move of a strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Send(bool),
    Done(BitString),
}

/// A running strategy. `next` sees the whole transcript so far and is only
/// called on the party's own turns.
pub trait Party {
    fn next(&mut self, transcript: &BitString) -> Move;
}

pub trait ProtocolSpec: Send + Sync {
    fn name(&self) -> String;
    fn rand_len_a(&self, n: usize) -> usize;
    fn rand_len_b(&self, n: usize) -> usize;
    /// Largest number of moves either side may make.
    fn runtime_bound(&self, n: usize) -> u64;
    fn party(&self, side: Side, n: usize, rand: &BitString) -> Box<dyn Party + '_>;

    /// Rejects input sizes the protocol is not defined for.
    fn validate(&self, _n: usize) -> Result<()> {
        Ok(())
    }

    /// Randomness pairs that represent every distinct behavior, when the
    /// raw randomness is partly redundant (redraw slots).
    fn effective_domain(&self, _n: usize) -> Option<Vec<(BitString, BitString)>> {
        None
    }

    /// Equivalent direct computation, used when available.
    fn fast_outcome(&self, _n: usize, _rand_a: &BitString, _rand_b: &BitString) -> Option<Result<Outcome>> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub transcript: BitString,
    pub x: BitString,
    pub y: BitString,
    pub steps_a: u64,
    pub steps_b: u64,
}

impl Outcome {
    pub fn agree(&self) -> bool {
        self.x == self.y
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub n: usize,
    pub seed: u64,
    pub rand_a: BitString,
    pub rand_b: BitString,
    pub outcome: Outcome,
}

impl ProtocolRun {
    /// `{seed, rand_a, rand_b, pi, x, y}` on one line.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "seed": self.seed,
            "rand_a": self.rand_a,
            "rand_b": self.rand_b,
            "pi": self.outcome.transcript,
            "x": self.outcome.x,
            "y": self.outcome.y,
        })
        .to_string()
    }
}

/// Runs both strategies on fixed randomness.
pub fn replay(spec: &dyn ProtocolSpec, n: usize, rand_a: &BitString, rand_b: &BitString) -> Result<Outcome> {
    spec.validate(n)?;
    for (side, r, want) in [(Side::A, rand_a, spec.rand_len_a(n)), (Side::B, rand_b, spec.rand_len_b(n))] {
        if r.len() != want {
            return Err(Error::InvalidParameter(format!(
                "{} randomness has {} bits, expected {want}",
                side.name(),
                r.len()
            )));
        }
    }
    let bound = spec.runtime_bound(n);
    let mut parties = [spec.party(Side::A, n, rand_a), spec.party(Side::B, n, rand_b)];
    let mut outputs: [Option<BitString>; 2] = [None, None];
    let mut steps = [0u64; 2];
    let mut transcript = BitString::new();
    let mut turn = 0usize;
    while outputs.iter().any(Option::is_none) {
        if outputs[turn].is_some() {
            turn ^= 1;
            continue;
        }
        steps[turn] += 1;
        if steps[turn] > bound {
            return Err(Error::RuntimeBoundExceeded {
                side: if turn == 0 { "alice" } else { "bob" },
                n,
                bound,
            });
        }
        match parties[turn].next(&transcript) {
            Move::Send(b) => {
                if transcript.len() % 2 != turn {
                    transcript.push(false);
                }
                transcript.push(b);
            }
            Move::Done(out) => outputs[turn] = Some(out),
        }
        turn ^= 1;
    }
    let [x, y] = outputs.map(Option::unwrap_or_default);
    Ok(Outcome { transcript, x, y, steps_a: steps[0], steps_b: steps[1] })
}

/// `replay`, or the protocol's equivalent direct computation.
pub fn outcome(spec: &dyn ProtocolSpec, n: usize, rand_a: &BitString, rand_b: &BitString) -> Result<Outcome> {
    match spec.fast_outcome(n, rand_a, rand_b) {
        Some(r) => r,
        None => replay(spec, n, rand_a, rand_b),
    }
}

pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitString {
    BitString::from_bits((0..len).map(|_| rng.gen::<bool>()).collect())
}

/// Draws Alice's then Bob's randomness from `seed` and runs the protocol.
pub fn execute(spec: &dyn ProtocolSpec, n: usize, seed: u64) -> Result<ProtocolRun> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    spec.validate(n)?;
    let mut rng = rng_from(seed);
    let rand_a = random_bits(spec.rand_len_a(n), &mut rng);
    let rand_b = random_bits(spec.rand_len_b(n), &mut rng);
    let outcome = outcome(spec, n, &rand_a, &rand_b)?;
    Ok(ProtocolRun { n, seed, rand_a, rand_b, outcome })
}

/// Seed of trial `i` under root `seed`.
pub fn trial_seed(seed: u64, i: u64) -> u64 {
    derive(seed, streams::PROTOCOL, i)
}

pub type AgreementReport = BinomialEstimate;

/// Monte-Carlo `Pr[x = y]` with a 95% Clopper–Pearson interval.
pub fn estimate_agreement(spec: &dyn ProtocolSpec, n: usize, trials: u64, seed: u64) -> Result<AgreementReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let agree = (0..trials)
        .into_par_iter()
        .map(|i| execute(spec, n, trial_seed(seed, i)).map(|r| r.outcome.agree() as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(BinomialEstimate::new(agree, trials))
}

/// Built-in protocols by name: `null`, `coinflip`, `zeromask`,
/// `transparent`, `toydh`, `levin`.
pub fn by_name(name: &str, c: f64, time: crate::toyvm::TimePreset) -> Result<Box<dyn ProtocolSpec>> {
    Ok(match name {
        "null" => Box::new(Null),
        "coinflip" => Box::new(Coinflip),
        "zeromask" => Box::new(ZeroMask::new(2)),
        "transparent" => Box::new(Transparent::new(1)),
        "toydh" => Box::new(ToyDh),
        "levin" => Box::new(LevinSearch::new(c, time)?),
        other => return Err(Error::InvalidParameter(format!("unknown protocol {other:?}"))),
    })
}
