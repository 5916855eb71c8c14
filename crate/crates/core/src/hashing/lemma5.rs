//! The two-hash inverse lemma over a rectangle partition of `R = {0,1}^ra x {0,1}^rb`.
//!
//! For each rectangle `A x B`, `h` ranges over `H_{ra, floor log|A|}`, `g` over
//! `H_{rb, floor log|B|}`, `w` and `v` over the matching ranges, and the tuple is
//! `(h, h_A^{-1}(w), g, g_B^{-1}(v))`. The rectangle is chosen with
//! probability `|A||B|/|R|`.
//!
//! Within a rectangle the defined tuples form `S_X * S_Y` equally likely points,
//! where `S_X = sum_h |h(A)|`, so the exact mode works with per-rectangle
//! counts instead of listing points.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::{ratio, ratio_int, ratio_string, ratio_u, Ratio};
use super::matrix::{pseudo_inverse_packed, MatrixFamily, MatrixHash};
use super::observations::support_size_packed;
use crate::error::{Error, Result};
use crate::seed::{mix64, rng_from};
use crate::stats::BinomialEstimate;

/// Largest `|R|` handled in exact mode.
pub const EXACT_MAX_LOG_R: usize = 8;
pub const EXACT_MAX_RHO: usize = 4;
/// Largest side width for Monte-Carlo sampling.
pub const MC_MAX_RHO: usize = 16;

/// Transcript-indexed rectangles `A_pi x B_pi` partitioning `R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibleSets {
    pub rho_a: usize,
    pub rho_b: usize,
    /// `(A_pi, B_pi)` as sorted packed values.
    pub parts: Vec<(Vec<u64>, Vec<u64>)>,
}

impl CompatibleSets {
    pub fn new(rho_a: usize, rho_b: usize, parts: Vec<(Vec<u64>, Vec<u64>)>) -> Result<Self> {
        if rho_a > MC_MAX_RHO || rho_b > MC_MAX_RHO {
            return Err(Error::DomainTooLarge(format!("randomness widths {rho_a}, {rho_b}")));
        }
        let mut parts: Vec<_> = parts
            .into_iter()
            .map(|(mut a, mut b)| {
                a.sort_unstable();
                a.dedup();
                b.sort_unstable();
                b.dedup();
                (a, b)
            })
            .collect();
        parts.sort();
        let s = Self { rho_a, rho_b, parts };
        s.validate()?;
        Ok(s)
    }

    /// The single rectangle `R` itself.
    pub fn trivial(rho_a: usize, rho_b: usize) -> Self {
        Self {
            rho_a,
            rho_b,
            parts: vec![((0..1u64 << rho_a).collect(), (0..1u64 << rho_b).collect())],
        }
    }

    /// Groups `R` by transcript and checks each group is a rectangle.
    pub fn from_transcripts<K: Ord, F: Fn(u64, u64) -> K>(rho_a: usize, rho_b: usize, transcript: F) -> Result<Self> {
        let mut groups: BTreeMap<K, Vec<(u64, u64)>> = BTreeMap::new();
        for a in 0..1u64 << rho_a {
            for b in 0..1u64 << rho_b {
                groups.entry(transcript(a, b)).or_default().push((a, b));
            }
        }
        let mut parts = Vec::new();
        for cells in groups.into_values() {
            let mut a: Vec<u64> = cells.iter().map(|c| c.0).collect();
            let mut b: Vec<u64> = cells.iter().map(|c| c.1).collect();
            a.sort_unstable();
            a.dedup();
            b.sort_unstable();
            b.dedup();
            if a.len() * b.len() != cells.len() {
                return Err(Error::InvalidParameter("transcript classes are not rectangles".into()));
            }
            parts.push((a, b));
        }
        Self::new(rho_a, rho_b, parts)
    }

    pub fn log_r(&self) -> usize {
        self.rho_a + self.rho_b
    }

    pub fn r_size(&self) -> u64 {
        1u64 << self.log_r()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("not a partition of R: {m}")));
        let mut covered = vec![false; 1usize << self.log_r()];
        for (a, b) in &self.parts {
            if a.is_empty() || b.is_empty() {
                return bad("empty side");
            }
            for &x in a {
                if x >> self.rho_a != 0 {
                    return bad("value wider than rho_a");
                }
                for &y in b {
                    if y >> self.rho_b != 0 {
                        return bad("value wider than rho_b");
                    }
                    let i = ((x << self.rho_b) | y) as usize;
                    if covered[i] {
                        return bad("rectangles overlap");
                    }
                    covered[i] = true;
                }
            }
        }
        if covered.iter().any(|c| !c) {
            return bad("cells left uncovered");
        }
        Ok(())
    }
}

pub fn floor_log2(n: u64) -> usize {
    assert!(n > 0);
    63 - n.leading_zeros() as usize
}

/// Exact counts for one side of one rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SideProfile {
    pub size: u64,
    pub k: usize,
    /// `log2 |H|`.
    pub log_h: usize,
    /// `sum_h |h(A)|`.
    pub support: u64,
}

impl SideProfile {
    pub fn compute(rho: usize, set: &[u64]) -> Self {
        let size = set.len() as u64;
        let k = floor_log2(size);
        let family = MatrixFamily::new(rho, k);
        Self { size, k, log_h: family.log_size(), support: support_size_packed(family, set) }
    }

    /// `|H| |W|`.
    pub fn cells(&self) -> u64 {
        1u64 << (self.log_h + self.k)
    }
}

/// Memoized [`SideProfile::compute`].
#[derive(Default)]
pub struct ProfileCache {
    map: HashMap<(usize, Vec<u64>), SideProfile>,
}

impl ProfileCache {
    pub fn get(&mut self, rho: usize, set: &[u64]) -> SideProfile {
        if let Some(p) = self.map.get(&(rho, set.to_vec())) {
            return *p;
        }
        let p = SideProfile::compute(rho, set);
        self.map.insert((rho, set.to_vec()), p);
        p
    }
}

/// A rectangle reduced to its two side profiles.
pub type RectProfile = (SideProfile, SideProfile);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma5Bounds {
    pub defined_mass_min: String,
    pub distance_max: String,
    pub epsilon: String,
}

impl Default for Lemma5Bounds {
    fn default() -> Self {
        Self {
            defined_mass_min: "1/4".into(),
            distance_max: "15/16".into(),
            epsilon: "1/32".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactLemma5 {
    pub defined_mass: Ratio,
    /// Conditional on being defined, against uniform on the union of `H x A x G x B`.
    pub distance_to_uniform: Ratio,
    pub universe_size: u64,
    /// Largest conditional mass on a set of fewer than `epsilon * universe` points.
    pub small_set_mass: Ratio,
    /// Smallest per-rectangle defined fraction of `H x A x G x B`.
    pub min_fraction: Ratio,
}

impl ExactLemma5 {
    pub fn passes(&self) -> bool {
        self.defined_mass >= ratio(1, 4)
            && self.distance_to_uniform <= ratio(15, 16)
            && self.small_set_mass <= Ratio::one() - epsilon()
    }
}

pub fn epsilon() -> Ratio {
    ratio(1, 32)
}

/// Exact statistics of the mixed tuple from rectangle profiles.
pub fn exact_from_profiles(rects: &[RectProfile], r_size: u64) -> ExactLemma5 {
    let r = ratio_int(r_size);
    let mut defined = Ratio::zero();
    let mut universe = 0u64;
    let mut min_fraction = Ratio::one();
    // (weight of pi, defined points, cells, universe block)
    let mut rows = Vec::with_capacity(rects.len());
    for (x, y) in rects {
        let weight = ratio_int(x.size * y.size) / &r;
        let cells = x.cells() as u128 * y.cells() as u128;
        let points = x.support * y.support;
        defined += &weight * ratio_u(points, 1) / Ratio::from_integer(cells.into());
        let block = (1u64 << x.log_h) * x.size * (1u64 << y.log_h) * y.size;
        let frac = ratio_u(points, block);
        if frac < min_fraction {
            min_fraction = frac;
        }
        universe += block;
        rows.push((weight, points, cells));
    }
    let uniform = ratio_u(1, universe);
    let mut overlap = Ratio::zero();
    // Per-point conditional masses, heaviest first.
    let mut classes: Vec<(Ratio, u64)> = Vec::with_capacity(rows.len());
    for (weight, points, cells) in rows {
        let m = weight / (Ratio::from_integer(cells.into()) * &defined);
        let low = if m < uniform { m.clone() } else { uniform.clone() };
        overlap += low * ratio_int(points);
        classes.push((m, points));
    }
    classes.sort_by(|a, b| b.0.cmp(&a.0));
    // Sets of size below epsilon * universe: at most ceil(universe / 32) - 1 points.
    let mut room = universe.div_ceil(32) - 1;
    let mut small_set_mass = Ratio::zero();
    for (m, points) in classes {
        if room == 0 {
            break;
        }
        let take = points.min(room);
        small_set_mass += m * ratio_int(take);
        room -= take;
    }
    ExactLemma5 {
        defined_mass: defined,
        distance_to_uniform: Ratio::one() - overlap,
        universe_size: universe,
        small_set_mass,
        min_fraction,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloLemma5 {
    pub trials: u64,
    pub defined: BinomialEstimate,
    /// `Pr[V not in S]` for a keyed pseudo-random set `S` of density 2^-6.
    pub outside_sparse_set: BinomialEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma5Mode {
    Exact,
    Montecarlo,
}

impl std::str::FromStr for Lemma5Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "montecarlo" | "mc" => Ok(Self::Montecarlo),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma5Report {
    pub mode: Lemma5Mode,
    pub rho_a: usize,
    pub rho_b: usize,
    pub rectangles: usize,
    pub defined_mass: Option<String>,
    pub distance_to_uniform: Option<String>,
    pub small_set_mass: Option<String>,
    pub universe_size: Option<u64>,
    pub monte_carlo: Option<MonteCarloLemma5>,
    pub bounds: Lemma5Bounds,
    pub verdict: String,
}

pub fn lemma5_exact(sets: &CompatibleSets) -> Result<ExactLemma5> {
    if sets.log_r() > EXACT_MAX_LOG_R || sets.rho_a > EXACT_MAX_RHO || sets.rho_b > EXACT_MAX_RHO {
        return Err(Error::DomainTooLarge(format!(
            "exact mode needs |R| <= 2^{EXACT_MAX_LOG_R} and rho <= {EXACT_MAX_RHO}"
        )));
    }
    let mut cache = ProfileCache::default();
    let rects: Vec<RectProfile> = sets
        .parts
        .iter()
        .map(|(a, b)| (cache.get(sets.rho_a, a), cache.get(sets.rho_b, b)))
        .collect();
    Ok(exact_from_profiles(&rects, sets.r_size()))
}

pub fn lemma5_montecarlo(sets: &CompatibleSets, trials: u64, seed: u64) -> Result<MonteCarloLemma5> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let mut lookup = HashMap::new();
    for (i, (a, b)) in sets.parts.iter().enumerate() {
        for &x in a {
            for &y in b {
                lookup.insert((x, y), i);
            }
        }
    }
    let mut rng = rng_from(seed);
    let (mut defined, mut outside) = (0u64, 0u64);
    for _ in 0..trials {
        let a = rng.gen_range(0..1u64 << sets.rho_a);
        let b = rng.gen_range(0..1u64 << sets.rho_b);
        let (set_a, set_b) = &sets.parts[lookup[&(a, b)]];
        let ka = floor_log2(set_a.len() as u64);
        let kb = floor_log2(set_b.len() as u64);
        let h = MatrixHash::random(ka, sets.rho_a, &mut rng);
        let g = MatrixHash::random(kb, sets.rho_b, &mut rng);
        let w = rng.gen_range(0..1u64 << ka);
        let v = rng.gen_range(0..1u64 << kb);
        if let (Some(x), Some(y)) = (pseudo_inverse_packed(&h, set_a, w), pseudo_inverse_packed(&g, set_b, v)) {
            defined += 1;
            let mut key = mix64(seed ^ 0x5eed);
            for part in h.row_bits().iter().chain([x].iter()).chain(g.row_bits()).chain([y].iter()) {
                key = mix64(key ^ part);
            }
            key = mix64(key ^ ((ka as u64) << 32) ^ kb as u64);
            if key >> 58 != 0 {
                outside += 1;
            }
        }
    }
    Ok(MonteCarloLemma5 {
        trials,
        defined: BinomialEstimate::new(defined, trials),
        outside_sparse_set: BinomialEstimate::new(outside, defined.max(1)),
    })
}

/// Runs one mode and packages the JSON report.
pub fn lemma5_check(sets: &CompatibleSets, mode: Lemma5Mode, trials: u64, seed: u64) -> Result<Lemma5Report> {
    let mut report = Lemma5Report {
        mode,
        rho_a: sets.rho_a,
        rho_b: sets.rho_b,
        rectangles: sets.parts.len(),
        defined_mass: None,
        distance_to_uniform: None,
        small_set_mass: None,
        universe_size: None,
        monte_carlo: None,
        bounds: Lemma5Bounds::default(),
        verdict: String::new(),
    };
    let pass = match mode {
        Lemma5Mode::Exact => {
            let e = lemma5_exact(sets)?;
            report.defined_mass = Some(ratio_string(&e.defined_mass));
            report.distance_to_uniform = Some(ratio_string(&e.distance_to_uniform));
            report.small_set_mass = Some(ratio_string(&e.small_set_mass));
            report.universe_size = Some(e.universe_size);
            e.passes()
        }
        Lemma5Mode::Montecarlo => {
            let mc = lemma5_montecarlo(sets, trials, seed)?;
            let pass = mc.defined.ci_high >= 0.25 && mc.outside_sparse_set.ci_high >= 1.0 / 32.0;
            report.monte_carlo = Some(mc);
            pass
        }
    };
    report.verdict = if pass { "pass" } else { "fail" }.into();
    Ok(report)
}

/// All set partitions of `0..n`, as restricted growth strings turned into blocks.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<u64>>> {
    fn go(i: usize, n: usize, rgs: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<Vec<u64>>>) {
        if i == n {
            let blocks = rgs.iter().copied().max().map_or(0, |m| m + 1);
            let mut parts = vec![Vec::new(); blocks];
            for (e, &b) in rgs.iter().enumerate() {
                parts[b].push(e as u64);
            }
            out.push(parts);
            return;
        }
        for b in 0..=max {
            rgs.push(b);
            go(i + 1, n, rgs, max.max(b + 1), out);
            rgs.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Set partitions of `{0,1}^rho`, deduplicated by the multiset of side profiles.
pub fn partition_profiles(rho: usize, cache: &mut ProfileCache) -> Vec<Vec<SideProfile>> {
    let mut seen = std::collections::BTreeSet::new();
    for p in set_partitions(1 << rho) {
        let mut prof: Vec<SideProfile> = p.iter().map(|blk| cache.get(rho, blk)).collect();
        prof.sort();
        seen.insert(prof);
    }
    seen.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustiveSummary {
    pub rho_a: usize,
    pub rho_b: usize,
    pub adaptive: bool,
    pub families: u64,
    pub min_defined_mass: Ratio,
    pub max_distance: Ratio,
    pub max_small_set_mass: Ratio,
    pub failures: u64,
}

fn summarize(rho_a: usize, rho_b: usize, adaptive: bool, results: Vec<ExactLemma5>) -> ExhaustiveSummary {
    let mut s = ExhaustiveSummary {
        rho_a,
        rho_b,
        adaptive,
        families: results.len() as u64,
        min_defined_mass: Ratio::one(),
        max_distance: Ratio::zero(),
        max_small_set_mass: Ratio::zero(),
        failures: 0,
    };
    for e in results {
        if !e.passes() {
            s.failures += 1;
        }
        s.min_defined_mass = s.min_defined_mass.min(e.defined_mass);
        s.max_distance = s.max_distance.max(e.distance_to_uniform);
        s.max_small_set_mass = s.max_small_set_mass.max(e.small_set_mass);
    }
    s
}

/// Every product family `{P_i x Q_j}` for set partitions `P` of `{0,1}^ra`
/// and `Q` of `{0,1}^rb`, up to profile equivalence.
pub fn exhaustive_product(rho_a: usize, rho_b: usize) -> Result<ExhaustiveSummary> {
    if rho_a > 3 || rho_b > 3 {
        return Err(Error::DomainTooLarge("product families need rho <= 3 per side".into()));
    }
    let mut cache = ProfileCache::default();
    let pa = partition_profiles(rho_a, &mut cache);
    let pb = partition_profiles(rho_b, &mut cache);
    let r = 1u64 << (rho_a + rho_b);
    let results: Vec<ExactLemma5> = pa
        .par_iter()
        .flat_map_iter(|p| {
            pb.iter().map(move |q| {
                let rects: Vec<RectProfile> =
                    p.iter().flat_map(|&x| q.iter().map(move |&y| (x, y))).collect();
                exact_from_profiles(&rects, r)
            })
        })
        .collect();
    Ok(summarize(rho_a, rho_b, false, results))
}

/// Multisets of size `k` over `0..n`, as non-decreasing index vectors.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Largest number of adaptive families evaluated in one sweep.
pub const ADAPTIVE_CAP: u64 = 5_000_000;

/// One-round adaptive families: Alice's message splits `{0,1}^ra` into
/// blocks, then Bob's reply splits `{0,1}^rb` differently under each block.
/// Blocks with equal profiles are interchangeable, so their choices are
/// enumerated as multisets.
pub fn exhaustive_adaptive(rho_a: usize, rho_b: usize) -> Result<ExhaustiveSummary> {
    if rho_a > 3 || rho_b > 3 {
        return Err(Error::DomainTooLarge("adaptive families need rho <= 3 per side".into()));
    }
    let mut cache = ProfileCache::default();
    let pa = partition_profiles(rho_a, &mut cache);
    let pb = partition_profiles(rho_b, &mut cache);
    // Each A-partition as (profile, multiplicity) groups.
    let grouped: Vec<Vec<(SideProfile, usize)>> = pa
        .iter()
        .map(|p| {
            let mut g: Vec<(SideProfile, usize)> = Vec::new();
            for &x in p {
                match g.last_mut() {
                    Some((y, c)) if *y == x => *c += 1,
                    _ => g.push((x, 1)),
                }
            }
            g
        })
        .collect();
    let n = pb.len() as u64;
    let total: u64 = grouped
        .iter()
        .map(|g| g.iter().fold(1u64, |acc, &(_, c)| acc.saturating_mul(binomial(n + c as u64 - 1, c as u64))))
        .fold(0u64, u64::saturating_add);
    if total > ADAPTIVE_CAP {
        return Err(Error::DomainTooLarge(format!("{total} adaptive families at rho = ({rho_a}, {rho_b})")));
    }
    let r = 1u64 << (rho_a + rho_b);
    let results: Vec<ExactLemma5> = grouped
        .par_iter()
        .flat_map_iter(|groups| {
            let options: Vec<Vec<Vec<usize>>> = groups.iter().map(|&(_, c)| multisets(pb.len(), c)).collect();
            let mut out = Vec::new();
            let mut choice = vec![0usize; groups.len()];
            loop {
                let mut rects: Vec<RectProfile> = Vec::new();
                for (g, (&(x, _), &ci)) in groups.iter().zip(&choice).enumerate() {
                    for &q in &options[g][ci] {
                        rects.extend(pb[q].iter().map(|&y| (x, y)));
                    }
                }
                out.push(exact_from_profiles(&rects, r));
                let mut i = 0;
                while i < choice.len() {
                    choice[i] += 1;
                    if choice[i] < options[i].len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
                if i == choice.len() {
                    break;
                }
            }
            out
        })
        .collect();
    Ok(summarize(rho_a, rho_b, true, results))
}
