//! Exact checks of the hashing and closeness facts behind the two-hash lemma.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::distribution::{ratio_int, ratio_string, ratio_u, statistical_distance, Distribution, Ratio};
use super::matrix::{pseudo_inverse_packed, MatrixFamily};
use crate::bitcore::BitString;
use crate::error::{Error, Result};

/// Exhaustive scale for the single-hash observations.
pub const MAX_RHO: usize = 4;
pub const MAX_K: usize = 3;

fn check_guards(rho: usize, k: usize) -> Result<()> {
    if rho > MAX_RHO || k > MAX_K {
        return Err(Error::DomainTooLarge(format!(
            "exhaustive hashing needs rho <= {MAX_RHO} and k <= {MAX_K}, got rho = {rho}, k = {k}"
        )));
    }
    Ok(())
}

/// Distinct packed members of `set`, all of length `rho`.
pub fn pack_set(rho: usize, set: &[BitString]) -> Result<Vec<u64>> {
    let mut out = BTreeSet::new();
    for a in set {
        if a.len() != rho {
            return Err(Error::LengthMismatch { expected: rho, got: a.len() });
        }
        out.insert(a.to_u64());
    }
    Ok(out.into_iter().collect())
}

/// `sum_h |h(A)|`: the number of pairs `(h(a), h)` with positive probability.
pub fn support_size_packed(family: MatrixFamily, set: &[u64]) -> u64 {
    let range = family.range_size() as usize;
    let mut seen = vec![false; range];
    let mut total = 0u64;
    for h in family.members() {
        seen.iter_mut().for_each(|s| *s = false);
        for &a in set {
            let w = h.apply_packed(a) as usize;
            if !seen[w] {
                seen[w] = true;
                total += 1;
            }
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportReport {
    pub rho: usize,
    pub k: usize,
    pub set_size: usize,
    pub family_size: u64,
    pub range_size: u64,
    /// Whether `|W| <= |A|`, the hypothesis of the bound.
    pub precondition: bool,
    pub support: u64,
    /// `|H| |W| / 2`.
    pub bound: String,
    pub holds: bool,
}

/// Exact support size of `(h(a), h)` for uniform `h in H_{rho,k}` and `a in A`.
pub fn support_lower_bound_check(rho: usize, k: usize, set: &[BitString]) -> Result<SupportReport> {
    check_guards(rho, k)?;
    let packed = pack_set(rho, set)?;
    Ok(support_report_packed(rho, k, &packed))
}

pub fn support_report_packed(rho: usize, k: usize, set: &[u64]) -> SupportReport {
    let family = MatrixFamily::new(rho, k);
    let support = support_size_packed(family, set);
    let hw = family.size() * family.range_size();
    SupportReport {
        rho,
        k,
        set_size: set.len(),
        family_size: family.size(),
        range_size: family.range_size(),
        precondition: family.range_size() <= set.len() as u64,
        support,
        bound: ratio_string(&ratio_u(hw, 2)),
        holds: 2 * support >= hw,
    }
}

/// Key of the inverse pair: `(matrix index, preimage)`, `None` when undefined.
pub type InverseKey = Option<(u64, u64)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseReport {
    pub rho: usize,
    pub k: usize,
    pub set_size: usize,
    pub precondition: bool,
    pub defined_mass: String,
    pub defined_support: u64,
    /// Every defined value carries the same mass.
    pub conditional_uniform: bool,
    /// `defined_mass >= 1/2`.
    pub holds: bool,
}

/// Exact law of `(h, h_A^{-1}(w))` for uniform `h in H_{rho,k}` and `w in {0,1}^k`.
pub fn inverse_pair_distribution(
    rho: usize,
    k: usize,
    set: &[BitString],
) -> Result<(Distribution<InverseKey>, InverseReport)> {
    check_guards(rho, k)?;
    let packed = pack_set(rho, set)?;
    Ok(inverse_pair_packed(rho, k, &packed))
}

pub fn inverse_pair_packed(rho: usize, k: usize, set: &[u64]) -> (Distribution<InverseKey>, InverseReport) {
    let family = MatrixFamily::new(rho, k);
    let cell = ratio_u(1, family.size() * family.range_size());
    let mut items = Vec::new();
    for (index, h) in family.members().enumerate() {
        for w in 0..family.range_size() {
            let key = pseudo_inverse_packed(&h, set, w).map(|a| (index as u64, a));
            items.push((key, cell.clone()));
        }
    }
    let dist = Distribution::from_masses(items).expect("cells sum to one");
    let defined_mass = Ratio::one() - dist.mass(&None);
    let defined: Vec<&Ratio> = dist.iter().filter(|(k, _)| k.is_some()).map(|(_, m)| m).collect();
    let conditional_uniform = defined.windows(2).all(|w| w[0] == w[1]);
    let report = InverseReport {
        rho,
        k,
        set_size: set.len(),
        precondition: family.range_size() <= set.len() as u64,
        defined_support: defined.len() as u64,
        conditional_uniform,
        holds: defined_mass.clone() * ratio_int(2) >= Ratio::one(),
        defined_mass: ratio_string(&defined_mass),
    };
    (dist, report)
}

/// Uniform distribution on `universe`.
pub fn uniform_on<K: Ord + Clone>(universe: &[K]) -> Result<Distribution<K>> {
    Distribution::uniform(universe.iter().cloned())
}

/// Both sides of the set-hitting inequality: `Pr[V in S]` and the lower
/// bound `|S|/|R| - d(V, U_R)`.
pub fn set_hitting_bound<K: Ord + Clone>(v: &Distribution<K>, universe: &[K], set: &[K]) -> Result<(Ratio, Ratio)> {
    let u = uniform_on(universe)?;
    let d = statistical_distance(v, &u);
    let s: BTreeSet<&K> = set.iter().collect();
    let hit = v.event_mass(|k| s.contains(k));
    let bound = ratio_u(s.len() as u64, universe.len() as u64) - d;
    Ok((hit, bound))
}

/// Distance from the uniform law on `s` of `|R|` points to `U_R`: `1 - s/r`.
pub fn uniform_subset_distance(s: u64, r: u64) -> Ratio {
    assert!(s >= 1 && s <= r);
    Ratio::one() - ratio_u(s, r)
}

/// Distance of the mixture `sum (|R_i|/|R|) V_i` to uniform on the union of
/// the disjoint blocks `R_i`, and the largest component distance.
pub fn mixture_distance<K: Ord + Clone>(parts: &[(Vec<K>, Distribution<K>)]) -> Result<(Ratio, Ratio)> {
    let total: u64 = parts.iter().map(|(r, _)| r.len() as u64).sum();
    let mut worst = Ratio::zero();
    let mut weighted = Vec::new();
    let mut universe = Vec::new();
    for (block, v) in parts {
        let d = statistical_distance(v, &uniform_on(block)?);
        if d > worst {
            worst = d;
        }
        weighted.push((ratio_u(block.len() as u64, total), v.clone()));
        universe.extend(block.iter().cloned());
    }
    let mix = Distribution::mixture(&weighted)?;
    Ok((statistical_distance(&mix, &uniform_on(&universe)?), worst))
}
