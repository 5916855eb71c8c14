//! Goldreich–Levin: next-bit predictor, list decoding, and the pipeline
//! that turns a key distinguisher into a key guesser.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitcore::{pad_pair, pair_len, BitString};
use crate::error::{Error, Result};
use crate::protocols::{execute, random_bits, trial_seed, ProtocolSpec};
use crate::seed::{derive, rng_from, streams};
use crate::stats::BinomialEstimate;

/// Tells `(pi, r_1..r_l, x.r_1..x.r_l)` from `(pi, r_1..r_l, U)`.
pub trait Distinguisher: Send + Sync {
    fn accept(&self, pi: &BitString, rs: &[BitString], bits: &BitString, seed: u64) -> bool;
}

impl<F: Fn(&BitString, &[BitString], &BitString, u64) -> bool + Send + Sync> Distinguisher for F {
    fn accept(&self, pi: &BitString, rs: &[BitString], bits: &BitString, seed: u64) -> bool {
        self(pi, rs, bits, seed)
    }
}

/// Guesses `x.r` for a query `r`.
pub trait ParityOracle: Send + Sync {
    fn predict(&self, r: &BitString, seed: u64) -> bool;
}

impl<F: Fn(&BitString, u64) -> bool + Send + Sync> ParityOracle for F {
    fn predict(&self, r: &BitString, seed: u64) -> bool {
        self(r, seed)
    }
}

/// Guess of `x.r_i` from `r_1..r_i` (`rs`) and `x.r_1..x.r_(i-1)`
/// (`known`): draw `r_(i+1)..r_l`, a guess `g` for bit `i` and uniform later
/// bits; answer `g` if the distinguisher accepts and `1 - g` otherwise.
pub fn gl_next_bit_predictor(
    dist: &dyn Distinguisher,
    pi: &BitString,
    rs: &[BitString],
    known: &BitString,
    ell: usize,
    seed: u64,
) -> Result<bool> {
    let i = rs.len();
    if i == 0 || i > ell || known.len() + 1 != i {
        return Err(Error::InvalidParameter(format!(
            "predictor needs 1 <= i <= l and i - 1 known bits, got i = {i}, l = {ell}, {} known",
            known.len()
        )));
    }
    let width = rs[0].len();
    let mut rng = rng_from(derive(seed, streams::GL, 0));
    let mut all = rs.to_vec();
    all.extend((i..ell).map(|_| random_bits(width, &mut rng)));
    let g: bool = rng.gen();
    let mut bits = known.clone();
    bits.push(g);
    bits.extend_from(&random_bits(ell - i, &mut rng));
    let acc = dist.accept(pi, &all, &bits, derive(seed, streams::GL, 1));
    Ok(if acc { g } else { !g })
}

/// Base points for `n`-bit secrets and advantage `alpha`:
/// `ceil(log2(n / alpha^2)) + guard`.
pub fn gl_base_points(n: usize, alpha: f64, guard: usize) -> usize {
    ((n.max(1) as f64 / (alpha * alpha)).log2().ceil().max(1.0) as usize) + guard
}

pub const GL_MAX_N: usize = 32;
pub const GL_MAX_M: usize = 20;
pub const DEFAULT_GUARD: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlDecode {
    pub n: usize,
    pub m: usize,
    pub list: Vec<BitString>,
    /// Candidate agreeing most often with the oracle on the sample points.
    pub best: BitString,
    pub queries: u64,
}

fn fwht(a: &mut [i64]) {
    let mut h = 1;
    while h < a.len() {
        for i in (0..a.len()).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (a[j], a[j + h]);
                a[j] = x + y;
                a[j + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// List decoding from an oracle correct on more than half of the queries.
///
/// Draws `m` base points `s_j`; each nonempty subset `J` gives the point
/// `r_J = xor s_j` and, under a guess `sigma` of the bits `x.s_j`, the value
/// `x.r_J = sigma.J`. Bit `i` of the candidate for `sigma` is the majority
/// over `J` of `sigma.J xor P(r_J + e_i)`. The oracle is queried once per
/// `(J, i)` and once per `J` for scoring; the majorities for all `2^m`
/// guesses come from one Walsh–Hadamard transform per bit.
pub fn gl_list_decode(oracle: &dyn ParityOracle, n: usize, alpha: f64, guard: usize, seed: u64) -> Result<GlDecode> {
    if n == 0 || n > GL_MAX_N || alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!("list decoding needs 1 <= n <= {GL_MAX_N} and alpha > 0")));
    }
    let m = gl_base_points(n, alpha, guard);
    if m > GL_MAX_M {
        return Err(Error::DomainTooLarge(format!("{m} base points")));
    }
    let size = 1usize << m;
    let mut rng = rng_from(derive(seed, streams::GL, 2));
    let base: Vec<u64> = (0..m).map(|_| rng.gen::<u64>() & ((1u64 << n) - 1)).collect();
    let mut points = vec![0u64; size];
    for j in 1..size {
        let low = j.trailing_zeros() as usize;
        points[j] = points[j & (j - 1)] ^ base[low];
    }
    let query = |r: u64, q: u64| oracle.predict(&BitString::from_u64(r, n), derive(seed, streams::GL, 3 + q));
    // votes[i][J] = +1 if P(r_J + e_i) = 0, else -1; J = 0 abstains.
    let per_bit: Vec<Vec<i64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let e = 1u64 << (n - 1 - i);
            let mut f = vec![0i64; size];
            for j in 1..size {
                f[j] = if query(points[j] ^ e, (i * size + j) as u64) { -1 } else { 1 };
            }
            fwht(&mut f);
            f
        })
        .collect();
    let score_answers: Vec<bool> = (0..size)
        .map(|j| query(points[j], (n * size + j) as u64))
        .collect();
    let list: Vec<u64> = (0..size)
        .map(|sigma| {
            // W_i(sigma) = sum_J (-1)^(sigma.J + P) > 0 votes for 0.
            (0..n).fold(0u64, |acc, i| (acc << 1) | (per_bit[i][sigma] < 0) as u64)
        })
        .collect();
    let score = |x: u64| -> usize {
        (1..size)
            .filter(|&j| ((x & points[j]).count_ones() % 2 == 1) == score_answers[j])
            .count()
    };
    let best = list
        .iter()
        .copied()
        .enumerate()
        .max_by_key(|&(i, x)| (score(x), std::cmp::Reverse(i)))
        .map(|(_, x)| x)
        .unwrap_or(0);
    Ok(GlDecode {
        n,
        m,
        list: list.into_iter().map(|x| BitString::from_u64(x, n)).collect(),
        best: BitString::from_u64(best, n),
        queries: (n * (size - 1) + size) as u64,
    })
}

/// Oracle answering `x.r` correctly with probability `p` per query.
#[derive(Clone, Debug)]
pub struct NoisyOracle {
    pub x: BitString,
    pub p: f64,
}

impl ParityOracle for NoisyOracle {
    fn predict(&self, r: &BitString, seed: u64) -> bool {
        let truth = self.x.dot(r);
        if rng_from(seed).gen_bool(self.p) {
            truth
        } else {
            !truth
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyRecoveryReport {
    pub experiment: String,
    pub protocol: String,
    pub n: usize,
    pub base_n: usize,
    pub d: f64,
    pub ell: usize,
    pub key_len: usize,
    pub trials: u64,
    pub seed: u64,
    pub alpha: f64,
    pub m: usize,
    pub success: BinomialEstimate,
    /// `2^-|x|`.
    pub baseline: f64,
}

/// Padded pair of the extended protocol: `pi r_1 .. r_l` and
/// `x.r_1 .. x.r_l`, padded to length `n`.
pub fn extended_pair(pi: &BitString, x: &BitString, rs: &[BitString], n: usize) -> Result<crate::bitcore::PairCode> {
    let mut pi2 = pi.clone();
    for r in rs {
        pi2.extend_from(r);
    }
    let key = BitString::from_bits(rs.iter().map(|r| x.dot(r)).collect());
    pad_pair(&pi2, &key, n).map_err(|_| Error::EmbeddingTooLong { needed: pair_len(pi2.len(), key.len()) + 2, target: n })
}

/// Extends a base protocol run at `base_n` by `l = ceil(d log2 n)` random
/// strings of length `|x|`, then tries to recover `x` from the transcript
/// alone: fix a random index `i`, random `r_1..r_(i-1)` and random guesses
/// of their bits, list-decode with the resulting predictor, and output the
/// best-scoring candidate.
#[allow(clippy::too_many_arguments)]
pub fn key_recovery_pipeline(
    spec: &dyn ProtocolSpec,
    dist: &dyn Distinguisher,
    n: usize,
    base_n: usize,
    d: f64,
    alpha: f64,
    trials: u64,
    seed: u64,
) -> Result<KeyRecoveryReport> {
    if d.is_nan() || d <= 0.0 || n < 2 || trials == 0 {
        return Err(Error::InvalidParameter("pipeline needs d > 0, n >= 2, trials >= 1".into()));
    }
    let ell = ((d * (n as f64).log2()).ceil() as usize).max(1);
    let probe = execute(spec, base_n, trial_seed(seed, 0))?;
    let key_len = probe.outcome.x.len();
    if key_len == 0 || key_len > GL_MAX_N {
        return Err(Error::InvalidParameter(format!("key length {key_len} outside 1..={GL_MAX_N}")));
    }
    let pred_alpha = alpha / ell as f64;
    let m = gl_base_points(key_len, pred_alpha, DEFAULT_GUARD);
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let run = execute(spec, base_n, trial_seed(seed, t))?;
            let (pi, x) = (&run.outcome.transcript, &run.outcome.x);
            let mut rng = rng_from(derive(seed, streams::GL, t));
            let rs: Vec<BitString> = (0..ell).map(|_| random_bits(key_len, &mut rng)).collect();
            // The real run must fit the standard length.
            extended_pair(pi, x, &rs, n)?;
            let i = rng.gen_range(1..=ell);
            let prefix_rs: Vec<BitString> = (1..i).map(|_| random_bits(key_len, &mut rng)).collect();
            let prefix_bits = random_bits(i - 1, &mut rng);
            let oracle = |r: &BitString, s: u64| {
                let mut q = prefix_rs.clone();
                q.push(r.clone());
                gl_next_bit_predictor(dist, pi, &q, &prefix_bits, ell, s).unwrap_or(false)
            };
            let dec = gl_list_decode(&oracle, key_len, pred_alpha, DEFAULT_GUARD, derive(seed, streams::GL, t ^ (1 << 63)))?;
            Ok(&dec.best == x)
        })
        .collect::<Result<_>>()?;
    let succ = hits.iter().filter(|&&h| h).count() as u64;
    Ok(KeyRecoveryReport {
        experiment: "gl-pipeline".into(),
        protocol: spec.name(),
        n,
        base_n,
        d,
        ell,
        key_len,
        trials,
        seed,
        alpha,
        m,
        success: BinomialEstimate::new(succ, trials),
        baseline: 0.5f64.powi(key_len as i32),
    })
}
