//! Whole-family checks: universality and the single-hash observations on
//! every admissible set.

use serde::{Deserialize, Serialize};

use super::distribution::{ratio_string, ratio_u, Ratio};
use super::matrix::{collision_fraction, MatrixFamily};
use super::observations::{inverse_pair_packed, support_report_packed, MAX_K, MAX_RHO};
use crate::error::{Error, Result};

/// Largest `rho` for which every subset is enumerated.
pub const SUBSETS_MAX_RHO: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalityReport {
    pub rho: usize,
    pub k: usize,
    pub family_size: u64,
    pub pairs: u64,
    /// `2^-k`.
    pub expected: String,
    /// Collision fractions that differ from `expected`.
    pub mismatches: u64,
}

/// Exact collision fraction of every pair `a != a'`.
pub fn universality(rho: usize, k: usize) -> Result<UniversalityReport> {
    if rho == 0 || rho > MAX_RHO || k > MAX_K {
        return Err(Error::DomainTooLarge(format!("universality check needs 1 <= rho <= {MAX_RHO}, k <= {MAX_K}")));
    }
    let family = MatrixFamily::new(rho, k);
    let expected = ratio_u(1, 1 << k);
    let mut pairs = 0;
    let mut mismatches = 0;
    for a in 0..1u64 << rho {
        for b in a + 1..1u64 << rho {
            let (hits, total) = collision_fraction(family, a, b);
            pairs += 1;
            if ratio_u(hits, total) != expected {
                mismatches += 1;
            }
        }
    }
    Ok(UniversalityReport { rho, k, family_size: family.size(), pairs, expected: ratio_string(&expected), mismatches })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationsReport {
    pub rho: usize,
    pub k: usize,
    /// Sets `A` with `|A| >= 2^k`.
    pub sets: u64,
    pub support_failures: u64,
    /// Smallest `support / (|H| |W|)`.
    pub min_support_fraction: String,
    pub inverse_failures: u64,
    pub min_defined_mass: String,
    pub nonuniform: u64,
}

impl ObservationsReport {
    pub fn holds(&self) -> bool {
        self.support_failures == 0 && self.inverse_failures == 0 && self.nonuniform == 0
    }
}

/// Support of `(h(a), h)` and the law of `(h, h_A^{-1}(w))` on every set
/// `A` of size at least `2^k`.
pub fn observations(rho: usize, k: usize) -> Result<ObservationsReport> {
    if rho > SUBSETS_MAX_RHO || k > rho {
        return Err(Error::DomainTooLarge(format!("subset enumeration needs k <= rho <= {SUBSETS_MAX_RHO}")));
    }
    let family = MatrixFamily::new(rho, k);
    let hw = family.size() * family.range_size();
    let mut r = ObservationsReport {
        rho,
        k,
        sets: 0,
        support_failures: 0,
        min_support_fraction: String::new(),
        inverse_failures: 0,
        min_defined_mass: String::new(),
        nonuniform: 0,
    };
    let mut min_support: Option<Ratio> = None;
    let mut min_mass: Option<Ratio> = None;
    for mask in 1u64..1u64 << (1u64 << rho) {
        let set: Vec<u64> = (0..1u64 << rho).filter(|a| mask >> a & 1 == 1).collect();
        if (set.len() as u64) < family.range_size() {
            continue;
        }
        r.sets += 1;
        let s = support_report_packed(rho, k, &set);
        r.support_failures += !s.holds as u64;
        let frac = ratio_u(s.support, hw);
        if min_support.as_ref().is_none_or(|m| &frac < m) {
            min_support = Some(frac);
        }
        let (dist, inv) = inverse_pair_packed(rho, k, &set);
        r.inverse_failures += !inv.holds as u64;
        r.nonuniform += !inv.conditional_uniform as u64;
        let mass = dist.event_mass(|key| key.is_some());
        if min_mass.as_ref().is_none_or(|m| &mass < m) {
            min_mass = Some(mass);
        }
    }
    r.min_support_fraction = min_support.map(|m| ratio_string(&m)).unwrap_or_default();
    r.min_defined_mass = min_mass.map(|m| ratio_string(&m)).unwrap_or_default();
    Ok(r)
}
