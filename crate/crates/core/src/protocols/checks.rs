//! DH-likeness and standardness checks.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{execute, outcome, trial_seed, AgreementReport, ProtocolSpec};
use crate::bitcore::{pair_len, BitString};
use crate::error::{Error, Result};
use crate::stats::BinomialEstimate;

/// Largest total randomness enumerated by [`check_dh_like`].
pub const DH_MAX_RAND: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    /// Every raw randomness pair.
    Raw,
    /// The protocol's canonical representatives.
    Effective,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DhVerdict {
    Bijective {
        domain: DomainKind,
        size: u64,
    },
    NotInjective {
        domain: DomainKind,
        first: (BitString, BitString),
        second: (BitString, BitString),
        transcript: BitString,
    },
}

impl DhVerdict {
    pub fn is_bijective(&self) -> bool {
        matches!(self, DhVerdict::Bijective { .. })
    }
}

/// Checks that `(r_A, r_B) -> pi` is injective on its domain, so it is a
/// bijection onto its image. Protocols with an effective domain are checked
/// on it; others on all raw pairs, up to `DH_MAX_RAND` bits.
pub fn check_dh_like(spec: &dyn ProtocolSpec, n: usize) -> Result<DhVerdict> {
    let (kind, domain) = match spec.effective_domain(n) {
        Some(d) => (DomainKind::Effective, d),
        None => {
            let (la, lb) = (spec.rand_len_a(n), spec.rand_len_b(n));
            if la + lb > DH_MAX_RAND {
                return Err(Error::DomainTooLarge(format!(
                    "{} random bits exceed the exhaustive limit of {DH_MAX_RAND}",
                    la + lb
                )));
            }
            let pairs = BitString::all_of_len(la)
                .flat_map(|a| BitString::all_of_len(lb).map(move |b| (a.clone(), b)))
                .collect();
            (DomainKind::Raw, pairs)
        }
    };
    let transcripts: Vec<BitString> = domain
        .par_iter()
        .map(|(a, b)| outcome(spec, n, a, b).map(|o| o.transcript))
        .collect::<Result<_>>()?;
    let mut seen: HashMap<&BitString, usize> = HashMap::with_capacity(domain.len());
    for (i, t) in transcripts.iter().enumerate() {
        if let Some(&j) = seen.get(t) {
            return Ok(DhVerdict::NotInjective {
                domain: kind,
                first: domain[j].clone(),
                second: domain[i].clone(),
                transcript: t.clone(),
            });
        }
        seen.insert(t, i);
    }
    Ok(DhVerdict::Bijective { domain: kind, size: domain.len() as u64 })
}

/// Shannon entropy in bits of the transcript over the (effective or raw)
/// randomness domain taken uniformly.
pub fn transcript_entropy(spec: &dyn ProtocolSpec, n: usize) -> Result<f64> {
    let domain = match spec.effective_domain(n) {
        Some(d) => d,
        None => {
            let (la, lb) = (spec.rand_len_a(n), spec.rand_len_b(n));
            if la + lb > DH_MAX_RAND {
                return Err(Error::DomainTooLarge(format!("{} random bits", la + lb)));
            }
            BitString::all_of_len(la)
                .flat_map(|a| BitString::all_of_len(lb).map(move |b| (a.clone(), b)))
                .collect()
        }
    };
    let mut counts: HashMap<BitString, u64> = HashMap::new();
    for (a, b) in &domain {
        *counts.entry(outcome(spec, n, a, b)?.transcript).or_default() += 1;
    }
    let total = domain.len() as f64;
    Ok(counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardReport {
    pub n: usize,
    pub trials: u64,
    pub rand_len_a: usize,
    pub rand_len_b: usize,
    pub runtime_bound: u64,
    pub max_steps: u64,
    /// Runs with `|(pi, x)| != n`.
    pub length_violations: u64,
    pub runtime_violations: u64,
    /// Over completed runs.
    pub agreement: AgreementReport,
    pub violations: Vec<String>,
}

impl StandardReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples runs and records every deviation from `|(pi, x)| = n` and from
/// the declared runtime bound.
pub fn check_standard(spec: &dyn ProtocolSpec, n: usize, trials: u64, seed: u64) -> Result<StandardReport> {
    let runs: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|i| execute(spec, n, trial_seed(seed, i)))
        .collect();
    let bound = spec.runtime_bound(n);
    let mut report = StandardReport {
        n,
        trials,
        rand_len_a: spec.rand_len_a(n),
        rand_len_b: spec.rand_len_b(n),
        runtime_bound: bound,
        max_steps: 0,
        length_violations: 0,
        runtime_violations: 0,
        agreement: BinomialEstimate::new(0, 1),
        violations: Vec::new(),
    };
    let mut first_length = None;
    let (mut completed, mut agreed) = (0u64, 0u64);
    for run in runs {
        match run {
            Ok(run) => {
                let o = &run.outcome;
                completed += 1;
                agreed += o.agree() as u64;
                report.max_steps = report.max_steps.max(o.steps_a).max(o.steps_b);
                let len = pair_len(o.transcript.len(), o.x.len());
                if len != n {
                    report.length_violations += 1;
                    first_length.get_or_insert(len);
                }
            }
            Err(Error::RuntimeBoundExceeded { .. }) => report.runtime_violations += 1,
            Err(e) => return Err(e),
        }
    }
    if let Some(len) = first_length {
        report
            .violations
            .push(format!("{} runs with |(pi, x)| != {n}, e.g. {len}", report.length_violations));
    }
    if report.runtime_violations > 0 {
        report
            .violations
            .push(format!("{} runs exceeded {bound} moves", report.runtime_violations));
    }
    if completed > 0 {
        report.agreement = BinomialEstimate::new(agreed, completed);
    }
    // Randomness lengths are functions of n by construction of the trait.
    Ok(report)
}
