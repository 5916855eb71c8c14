//! Eve-driven decider and the sets `S_{n,l}`.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decider::Verdict;
use crate::bitcore::{pair_len, BitString};
use crate::error::{Error, Result};
use crate::hashing::MatrixHash;
use crate::protocols::levin::{append_hash_phase, hash_len, pad_key};
use crate::protocols::random_bits;
use crate::protocols::simple::alice_bits;
use crate::seed::{derive, rng_from, streams};
use crate::toyvm::{interactive_complexity, SearchBudget, TimePreset};

/// An eavesdropper guessing the key from `n` and the transcript.
pub trait Eve: Send + Sync {
    fn name(&self) -> String;
    fn guess(&self, n: usize, transcript: &BitString, seed: u64) -> Result<BitString>;
}

impl<E: Eve + ?Sized> Eve for Box<E> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn guess(&self, n: usize, transcript: &BitString, seed: u64) -> Result<BitString> {
        (**self).guess(n, transcript, seed)
    }
}

/// Sizes of the hash appendix for input length `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashPhase {
    pub n: usize,
    pub k: usize,
    pub rho: usize,
}

impl HashPhase {
    pub fn new(c: f64, n: usize) -> Result<Self> {
        if !(2..=64).contains(&n) {
            return Err(Error::InvalidParameter(format!("hash phase needs 2 <= n <= 64, got {n}")));
        }
        Ok(Self { n, k: hash_len(c, n), rho: n })
    }

    /// Transcript bits appended after `pi`.
    pub fn appended_len(&self) -> usize {
        2 * (self.k * self.rho + self.k)
    }

    /// `|x|` implied by `n` and the extended transcript, if consistent.
    pub fn key_len(&self, transcript_len: usize) -> Option<usize> {
        let pi_len = transcript_len.checked_sub(self.appended_len())?;
        self.n.checked_sub(pair_len(pi_len, 0))
    }

    /// `(h, h(x))` from the appendix.
    pub fn parse(&self, transcript: &BitString) -> Option<(MatrixHash, u64)> {
        let start = transcript.len().checked_sub(self.appended_len())?;
        let sent = alice_bits(&transcript.slice(start, transcript.len()));
        let hb = self.k * self.rho;
        let h = MatrixHash::from_bits(self.k, self.rho, &sent.truncated(hb)).ok()?;
        Some((h, sent.slice(hb, hb + self.k).to_u64()))
    }
}

/// `pi~`: `pi`, then Alice sends a random `h` and `h(x)`, Bob replies 1.
pub fn extend_transcript<R: Rng + ?Sized>(pi: &BitString, x: &BitString, c: f64, rng: &mut R) -> Result<(BitString, HashPhase)> {
    let n = pair_len(pi.len(), x.len());
    let hp = HashPhase::new(c, n)?;
    let h = MatrixHash::random(hp.k, hp.rho, rng);
    let hx = BitString::from_u64(h.apply_packed(pad_key(x, hp.rho)), hp.k);
    Ok((append_hash_phase(pi, &h, &hx, true), hp))
}

/// "Outside N" iff Eve recovers `x` from the extended transcript.
pub fn eve_decider(eve: &dyn Eve, pi: &BitString, x: &BitString, c: f64, seed: u64) -> Result<Verdict> {
    let mut rng = rng_from(derive(seed, streams::HASH, 0));
    let (t, hp) = extend_transcript(pi, x, c, &mut rng)?;
    let guess = eve.guess(hp.n, &t, derive(seed, streams::EVE, 0))?;
    Ok(if &guess == x { Verdict::OutsideN } else { Verdict::OutsideY })
}

/// Always the same string.
#[derive(Clone, Debug)]
pub struct FixedEve(pub BitString);

impl Eve for FixedEve {
    fn name(&self) -> String {
        format!("fixed-{}", self.0)
    }
    fn guess(&self, _n: usize, _t: &BitString, _seed: u64) -> Result<BitString> {
        Ok(self.0.clone())
    }
}

/// Uniform string of the implied key length.
#[derive(Clone, Copy, Debug)]
pub struct RandomEve {
    pub c: f64,
}

impl Eve for RandomEve {
    fn name(&self) -> String {
        "random".into()
    }
    fn guess(&self, n: usize, t: &BitString, seed: u64) -> Result<BitString> {
        let len = HashPhase::new(self.c, n)?.key_len(t.len()).unwrap_or(0);
        Ok(random_bits(len, &mut rng_from(seed)))
    }
}

/// Posterior guess under a uniform prior on `x`: the first string of the
/// implied length whose hash matches the transcript.
#[derive(Clone, Copy, Debug)]
pub struct PosteriorEve {
    pub c: f64,
}

/// Longest key [`PosteriorEve`] enumerates.
pub const POSTERIOR_MAX_KEY: usize = 20;

impl Eve for PosteriorEve {
    fn name(&self) -> String {
        "posterior".into()
    }
    fn guess(&self, n: usize, t: &BitString, _seed: u64) -> Result<BitString> {
        let hp = HashPhase::new(self.c, n)?;
        let (Some(len), Some((h, hx))) = (hp.key_len(t.len()), hp.parse(t)) else {
            return Ok(BitString::new());
        };
        if len > POSTERIOR_MAX_KEY {
            return Err(Error::DomainTooLarge(format!("{len}-bit keys")));
        }
        Ok(BitString::all_of_len(len)
            .find(|x| h.apply_packed(pad_key(x, hp.rho)) == hx)
            .unwrap_or_default())
    }
}

/// Fails with `BudgetExceeded` when a guess takes longer than `limit`.
pub struct Budgeted<E> {
    pub inner: E,
    pub limit: Duration,
}

impl<E: Eve> Eve for Budgeted<E> {
    fn name(&self) -> String {
        self.inner.name()
    }
    fn guess(&self, n: usize, t: &BitString, seed: u64) -> Result<BitString> {
        let start = Instant::now();
        let g = self.inner.guess(n, t, seed)?;
        if start.elapsed() > self.limit {
            return Err(Error::BudgetExceeded { budget_ms: self.limit.as_millis() as u64 });
        }
        Ok(g)
    }
}

pub const S_MAX_N: usize = 6;
pub const S_MAX_ELL: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SMember {
    pub pi: BitString,
    pub x: BitString,
    pub failures: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SCount {
    pub n: usize,
    pub ell: usize,
    pub eve: String,
    pub trials_per_pair: u64,
    pub t_steps: u64,
    /// Pairs of length `n` with `CI^t = ell`.
    pub level_size: usize,
    pub size: usize,
    pub members: Vec<SMember>,
    /// `|S| / 2^ell`.
    pub ratio: f64,
}

/// Pairs `(pi, x)` with `|(pi, x)| = n`.
pub fn pairs_of_len(n: usize) -> Vec<(BitString, BitString)> {
    let mut out = Vec::new();
    let mut p = 0;
    while pair_len(p, 0) <= n {
        let xl = n - pair_len(p, 0);
        for pi in BitString::all_of_len(p) {
            for x in BitString::all_of_len(xl) {
                out.push((pi.clone(), x));
            }
        }
        p += 1;
    }
    out
}

/// `S_{n,l}`: pairs with `CI^t = l`, `|(pi, x)| = n`, on which Eve fails
/// in more than a third of `trials_per_pair` runs of the Eve decider.
#[allow(clippy::too_many_arguments)]
pub fn count_s(
    n: usize,
    ell: usize,
    eve: &dyn Eve,
    c: f64,
    time: TimePreset,
    trials_per_pair: u64,
    seed: u64,
    budget: &SearchBudget,
) -> Result<SCount> {
    if n > S_MAX_N || ell > S_MAX_ELL {
        return Err(Error::DomainTooLarge(format!(
            "S counting needs n <= {S_MAX_N} and l <= {S_MAX_ELL}, got n = {n}, l = {ell}"
        )));
    }
    if n < 2 || trials_per_pair == 0 {
        return Err(Error::InvalidParameter("S counting needs n >= 2 and positive trials".into()));
    }
    let limits = time.limits(n);
    let pairs = pairs_of_len(n);
    let level: Vec<(usize, BitString, BitString)> = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (pi, x))| {
            // A search bounded by `ell` is finite exactly when `CI^t <= ell`.
            let v = interactive_complexity(&pi, &x, &limits, ell, budget)?;
            Ok((v.finite() == Some(ell)).then_some((i, pi, x)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let members: Vec<SMember> = level
        .par_iter()
        .map(|(i, pi, x)| {
            let mut failures = 0;
            for j in 0..trials_per_pair {
                let s = derive(derive(seed, streams::EVE, *i as u64), streams::DECIDER, j);
                if eve_decider(eve, pi, x, c, s)? == Verdict::OutsideY {
                    failures += 1;
                }
            }
            Ok((3 * failures > trials_per_pair).then(|| SMember { pi: pi.clone(), x: x.clone(), failures }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(SCount {
        n,
        ell,
        eve: eve.name(),
        trials_per_pair,
        t_steps: limits.max_steps,
        level_size: level.len(),
        size: members.len(),
        ratio: members.len() as f64 / (1u64 << ell) as f64,
        members,
    })
}

/// Smallest `K` with `|S_{n,l}| <= K 2^l` over the given counts.
pub fn measured_constant(counts: &[SCount]) -> f64 {
    counts.iter().map(|s| s.ratio).fold(0.0, f64::max)
}
