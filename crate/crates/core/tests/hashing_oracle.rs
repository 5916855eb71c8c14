//! Hashing and distribution checks against direct enumeration.

use std::collections::BTreeSet;

use kcagree::bitcore::BitString;
use kcagree::hashing::distribution::{ratio_u, Distribution, Ratio};
use kcagree::hashing::lemma5::{exact_from_profiles, set_partitions, ProfileCache, RectProfile};
use kcagree::hashing::observations::{
    inverse_pair_packed, mixture_distance, set_hitting_bound, support_report_packed, uniform_on,
    uniform_subset_distance,
};
use kcagree::hashing::{
    collision_fraction, lemma5_exact, pseudo_inverse, statistical_distance, CompatibleSets, MatrixFamily,
    MatrixHash,
};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Max over all events of `P(S) - Q(S)`.
fn distance_by_events(p: &[Ratio], q: &[Ratio]) -> Ratio {
    let n = p.len();
    let mut best = Ratio::zero();
    for mask in 0u32..1 << n {
        let mut d = Ratio::zero();
        for i in 0..n {
            if mask >> i & 1 == 1 {
                d += &p[i] - &q[i];
            }
        }
        if d > best {
            best = d;
        }
    }
    best
}

fn random_masses(r: &mut ChaCha8Rng, n: usize) -> Vec<Ratio> {
    let w: Vec<u64> = (0..n).map(|_| r.gen_range(0..6)).collect();
    let total: u64 = w.iter().sum::<u64>().max(1);
    if w.iter().all(|&x| x == 0) {
        let mut v = vec![Ratio::zero(); n];
        v[0] = Ratio::one();
        return v;
    }
    w.iter().map(|&x| ratio_u(x, total)).collect()
}

#[test]
fn universality_is_exact() {
    for rho in 1..=4 {
        for k in 0..=3 {
            let fam = MatrixFamily::new(rho, k);
            for a in 0..1u64 << rho {
                for b in a + 1..1u64 << rho {
                    let (hits, total) = collision_fraction(fam, a, b);
                    assert_eq!(ratio_u(hits, total), ratio_u(1, 1 << k), "rho={rho} k={k}");
                }
            }
        }
    }
}

#[test]
fn pseudo_inverse_matches_scan() {
    let mut r = rng(11);
    for _ in 0..500 {
        let rho = r.gen_range(1..=4);
        let k = r.gen_range(0..=3);
        let h = MatrixHash::random(k, rho, &mut r);
        let set: Vec<BitString> = BitString::all_of_len(rho).filter(|_| r.gen_bool(0.5)).collect();
        let w = BitString::from_u64(r.gen_range(0..1 << k), k);
        let mut scan = None;
        for a in BitString::all_of_len(rho) {
            if set.contains(&a) && h.apply(&a).unwrap() == w {
                scan = Some(a);
                break;
            }
        }
        assert_eq!(pseudo_inverse(&h, &set, &w).unwrap(), scan);
    }
}

#[test]
fn distance_matches_event_formulation() {
    let mut r = rng(5);
    for _ in 0..200 {
        let n = r.gen_range(1..=6);
        let p = random_masses(&mut r, n);
        let q = random_masses(&mut r, n);
        let dp = Distribution::from_masses(p.iter().cloned().enumerate()).unwrap();
        let dq = Distribution::from_masses(q.iter().cloned().enumerate()).unwrap();
        assert_eq!(statistical_distance(&dp, &dq), distance_by_events(&p, &q));
    }
}

/// Support of `(h(a), h)` by collecting the pairs.
fn support_oracle(rho: usize, k: usize, set: &[u64]) -> u64 {
    let mut pairs = BTreeSet::new();
    for (i, h) in MatrixFamily::new(rho, k).members().enumerate() {
        for &a in set {
            pairs.insert((h.apply_packed(a), i));
        }
    }
    pairs.len() as u64
}

fn subsets(rho: usize) -> impl Iterator<Item = Vec<u64>> {
    (1u64..1 << (1 << rho)).map(move |mask| (0..1u64 << rho).filter(|a| mask >> a & 1 == 1).collect())
}

#[test]
fn support_and_inverse_on_small_sets() {
    for rho in 1..=3 {
        for k in 0..=2 {
            for set in subsets(rho) {
                let rep = support_report_packed(rho, k, &set);
                assert_eq!(rep.support, support_oracle(rho, k, &set));
                let (dist, inv) = inverse_pair_packed(rho, k, &set);
                // Defined pairs biject with the support.
                assert_eq!(inv.defined_support, rep.support);
                assert!(inv.conditional_uniform);
                assert_eq!(dist.total(), Ratio::one());
                if rep.precondition {
                    assert!(rep.holds && inv.holds, "rho={rho} k={k} set={set:?}");
                }
            }
        }
    }
}

#[test]
fn set_hitting_on_constructed_laws() {
    let mut r = rng(8);
    let universe: Vec<u8> = (0..6).collect();
    for _ in 0..300 {
        let p = random_masses(&mut r, 6);
        let v = Distribution::from_masses(p.into_iter().enumerate().map(|(i, m)| (i as u8, m))).unwrap();
        for mask in 1u32..64 {
            let s: Vec<u8> = (0..6).filter(|i| mask >> i & 1 == 1).collect();
            let (hit, bound) = set_hitting_bound(&v, &universe, &s).unwrap();
            assert!(hit >= bound);
        }
    }
}

#[test]
fn uniform_on_subset_distance_is_exact() {
    let universe: Vec<u8> = (0..5).collect();
    for mask in 1u32..32 {
        let s: Vec<u8> = (0..5).filter(|i| mask >> i & 1 == 1).collect();
        let d = statistical_distance(&uniform_on(&s).unwrap(), &uniform_on(&universe).unwrap());
        assert_eq!(d, uniform_subset_distance(s.len() as u64, 5));
    }
}

#[test]
fn mixtures_stay_close() {
    let mut r = rng(3);
    for _ in 0..200 {
        let blocks = r.gen_range(1..=3);
        let mut parts = Vec::new();
        let mut next = 0u8;
        for _ in 0..blocks {
            let len = r.gen_range(1..=3);
            let block: Vec<u8> = (next..next + len).collect();
            next += len;
            let masses = random_masses(&mut r, len as usize);
            let v = Distribution::from_masses(block.iter().copied().zip(masses)).unwrap();
            parts.push((block, v));
        }
        let (mix, worst) = mixture_distance(&parts).unwrap();
        assert!(mix <= worst);
    }
}

type TupleKey = (usize, u64, u64, usize, u64, u64);

/// The mixed tuple law by listing every `(pi, h, w, g, v)`.
fn lemma5_oracle(sets: &CompatibleSets) -> (Ratio, Ratio) {
    let r = ratio_u(sets.r_size(), 1);
    let mut items: Vec<(Option<TupleKey>, Ratio)> = Vec::new();
    let mut universe: Vec<TupleKey> = Vec::new();
    for (a, b) in &sets.parts {
        let ka = 63 - (a.len() as u64).leading_zeros() as usize;
        let kb = 63 - (b.len() as u64).leading_zeros() as usize;
        let fa = MatrixFamily::new(sets.rho_a, ka);
        let fb = MatrixFamily::new(sets.rho_b, kb);
        let cells = fa.size() * fa.range_size() * fb.size() * fb.range_size();
        let weight = ratio_u((a.len() * b.len()) as u64, 1) / &r / ratio_u(cells, 1);
        for (hi, h) in fa.members().enumerate() {
            for &x in a {
                for (gi, _) in fb.members().enumerate() {
                    for &y in b {
                        universe.push((ka, hi as u64, x, kb, gi as u64, y));
                    }
                }
            }
            for w in 0..fa.range_size() {
                let x = a.iter().copied().filter(|&x| h.apply_packed(x) == w).min();
                for (gi, g) in fb.members().enumerate() {
                    for v in 0..fb.range_size() {
                        let y = b.iter().copied().filter(|&y| g.apply_packed(y) == v).min();
                        let key = x.zip(y).map(|(x, y)| (ka, hi as u64, x, kb, gi as u64, y));
                        items.push((key, weight.clone()));
                    }
                }
            }
        }
    }
    let law = Distribution::from_masses(items).unwrap();
    let defined = Ratio::one() - law.mass(&None);
    let conditional = Distribution::from_masses(
        law.iter().filter_map(|(k, m)| k.map(|k| (k, m / &defined))),
    )
    .unwrap();
    let uniform = Distribution::uniform(universe).unwrap();
    (defined, statistical_distance(&conditional, &uniform))
}

#[test]
fn lemma5_counts_match_listing() {
    let mut cases = vec![CompatibleSets::trivial(1, 1), CompatibleSets::trivial(2, 2), CompatibleSets::trivial(2, 1)];
    // Alice reveals her first bit.
    cases.push(CompatibleSets::from_transcripts(2, 2, |a, _| a >> 1).unwrap());
    // Alice reveals a bit, Bob answers with one depending on it.
    cases.push(CompatibleSets::from_transcripts(2, 2, |a, b| (a & 1, if a & 1 == 1 { b & 1 } else { b >> 1 })).unwrap());
    for p in set_partitions(4).into_iter().step_by(3) {
        for q in set_partitions(2) {
            let parts = p.iter().flat_map(|x| q.iter().map(move |y| (x.clone(), y.clone()))).collect();
            cases.push(CompatibleSets::new(2, 1, parts).unwrap());
        }
    }
    for sets in cases {
        let exact = lemma5_exact(&sets).unwrap();
        let (defined, distance) = lemma5_oracle(&sets);
        assert_eq!(exact.defined_mass, defined, "{sets:?}");
        assert_eq!(exact.distance_to_uniform, distance, "{sets:?}");
    }
}

#[test]
fn half_split_stays_within_bound() {
    let sets = CompatibleSets::from_transcripts(2, 2, |a, _| a >> 1).unwrap();
    let e = lemma5_exact(&sets).unwrap();
    assert!(e.passes(), "{e:?}");
    let mut cache = ProfileCache::default();
    let rects: Vec<RectProfile> =
        sets.parts.iter().map(|(a, b)| (cache.get(2, a), cache.get(2, b))).collect();
    assert_eq!(exact_from_profiles(&rects, 16), e);
}
