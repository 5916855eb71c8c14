//! Leakage experiment: `Pr[E(pi, x)] - Pr[E(pi, U)]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decider::{Decider, Verdict};
use super::embed::{breaker_e, BreakerConfig};
use crate::bitcore::{decode_pair, BitString, PairCode};
use crate::error::Result;
use crate::protocols::toydh::{self, ToyDh};
use crate::protocols::{execute, random_bits, trial_seed, ProtocolSpec};
use crate::seed::{derive, streams, trial_rng};
use crate::stats::clopper_pearson;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimates {
    pub p_real: f64,
    pub p_uniform: f64,
    pub gap: f64,
}

/// Exact binomial intervals. The gap interval combines the two marginal
/// intervals at 97.5% each, so it holds jointly at 95%.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapIntervals {
    pub p_real: (f64, f64),
    pub p_uniform: (f64, f64),
    pub gap: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub experiment: String,
    pub params: serde_json::Value,
    pub trials: u64,
    pub estimates: GapEstimates,
    pub ci: GapIntervals,
    pub seed: u64,
    pub hits_real: u64,
    pub hits_uniform: u64,
    /// Trials with `E(pi, x) = 1` and `E(pi, U) = 0`, and the reverse.
    pub discordant: (u64, u64),
}

impl LeakageReport {
    pub fn gap_positive(&self) -> bool {
        self.ci.gap.0 > 0.0
    }
}

pub fn gap_report(experiment: &str, params: serde_json::Value, seed: u64, pairs: &[(bool, bool)]) -> LeakageReport {
    let trials = pairs.len() as u64;
    let hits_real = pairs.iter().filter(|p| p.0).count() as u64;
    let hits_uniform = pairs.iter().filter(|p| p.1).count() as u64;
    let disc = (
        pairs.iter().filter(|p| p.0 && !p.1).count() as u64,
        pairs.iter().filter(|p| !p.0 && p.1).count() as u64,
    );
    let (pr, pu) = (hits_real as f64 / trials as f64, hits_uniform as f64 / trials as f64);
    let r95 = clopper_pearson(hits_real, trials, 0.05);
    let u95 = clopper_pearson(hits_uniform, trials, 0.05);
    let r975 = clopper_pearson(hits_real, trials, 0.025);
    let u975 = clopper_pearson(hits_uniform, trials, 0.025);
    LeakageReport {
        experiment: experiment.into(),
        params,
        trials,
        estimates: GapEstimates { p_real: pr, p_uniform: pu, gap: pr - pu },
        ci: GapIntervals { p_real: r95, p_uniform: u95, gap: (r975.0 - u975.1, r975.1 - u975.0) },
        seed,
        hits_real,
        hits_uniform,
        discordant: disc,
    }
}

/// Runs the protocol, draws `U` of length `|x|` from its own stream, and
/// evaluates `E` on `(pi, x)` and `(pi, U)` with the same breaker seed.
pub fn leakage_experiment(
    spec: &dyn ProtocolSpec,
    decider: &dyn Decider,
    cfg: &BreakerConfig,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<LeakageReport> {
    leakage_experiment_with_stream(spec, decider, cfg, n, trials, seed, streams::UNIFORM)
}

/// As [`leakage_experiment`] with `U` drawn from stream `uniform_stream`.
pub fn leakage_experiment_with_stream(
    spec: &dyn ProtocolSpec,
    decider: &dyn Decider,
    cfg: &BreakerConfig,
    n: usize,
    trials: u64,
    seed: u64,
    uniform_stream: u64,
) -> Result<LeakageReport> {
    if trials == 0 {
        return Err(crate::Error::InvalidParameter("trials must be positive".into()));
    }
    let pairs: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let run = execute(spec, n, trial_seed(seed, i))?;
            let (pi, x) = (&run.outcome.transcript, &run.outcome.x);
            let u = random_bits(x.len(), &mut trial_rng(seed, uniform_stream, i));
            let b = derive(seed, streams::BREAKER, i);
            Ok((breaker_e(decider, pi, x, cfg, b)?, breaker_e(decider, pi, &u, cfg, b)?))
        })
        .collect::<Result<_>>()?;
    let params = serde_json::json!({
        "protocol": spec.name(),
        "decider": decider.name(),
        "n": n,
        "epsilon": cfg.epsilon,
        "parity": cfg.parity,
    });
    Ok(gap_report("leakage", params, seed, &pairs))
}

/// Protocol-aware decider for ToyDH inputs: reads both public values from
/// the first 16 transcript bits, solves the discrete logarithm, and answers
/// "outside N" iff the key part starts with the shared key. The original
/// key length `n - 33` is read off the padded length `2n` or `2n + 1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ToyDhKeyDecider;

impl ToyDhKeyDecider {
    pub fn shared_key(pi: &BitString) -> Option<u64> {
        if pi.len() < toydh::PI_LEN {
            return None;
        }
        let m = toydh::MSG_BITS;
        let head = pi.truncated(toydh::PI_LEN);
        let a_msg = crate::protocols::simple::alice_bits(&head).truncated(m).to_u64();
        let b_msg = crate::protocols::simple::bob_bits(&head).slice(m, 2 * m).to_u64();
        let a = (1..toydh::P).find(|&e| toydh::pow_mod(toydh::G, e, toydh::P) == a_msg)?;
        Some(toydh::pow_mod(b_msg, a, toydh::P))
    }
}

impl Decider for ToyDhKeyDecider {
    fn name(&self) -> String {
        "toydh-key".into()
    }

    fn decide(&self, input: &PairCode, _seed: u64) -> crate::Result<Verdict> {
        let (pi, z) = decode_pair(&input.encoded)?;
        let Some(key) = Self::shared_key(&pi) else { return Ok(Verdict::OutsideY) };
        let key_len = ToyDh::key_len(input.len() / 2);
        let hit = key_len > 0 && z.len() >= key_len && z.truncated(key_len) == ToyDh::fit_key(key, key_len);
        Ok(if hit { Verdict::OutsideN } else { Verdict::OutsideY })
    }
}
