//! Finite distributions with exact rational masses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Ratio = BigRational;

pub fn ratio(num: i64, den: i64) -> Ratio {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn ratio_u(num: u64, den: u64) -> Ratio {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn ratio_int(n: u64) -> Ratio {
    BigRational::from_integer(BigInt::from(n))
}

/// `"p/q"` in lowest terms, `"p"` for integers.
pub fn ratio_string(r: &Ratio) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let bad = || Error::Malformed(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

pub fn ratio_to_f64(r: &Ratio) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Probability distribution on a finite set; zero masses are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution<K: Ord> {
    masses: BTreeMap<K, Ratio>,
}

impl<K: Ord + Clone> Distribution<K> {
    /// Merges repeated keys. Fails unless the masses are non-negative and sum to 1.
    pub fn from_masses<I: IntoIterator<Item = (K, Ratio)>>(items: I) -> Result<Self> {
        let mut masses: BTreeMap<K, Ratio> = BTreeMap::new();
        for (k, m) in items {
            if m < Ratio::zero() {
                return Err(Error::InvalidParameter("negative mass".into()));
            }
            *masses.entry(k).or_insert_with(Ratio::zero) += m;
        }
        masses.retain(|_, m| !m.is_zero());
        let d = Self { masses };
        if !d.total().is_one() {
            return Err(Error::InvalidParameter(format!(
                "masses sum to {}",
                ratio_string(&d.total())
            )));
        }
        Ok(d)
    }

    /// Normalizes non-negative weights.
    pub fn from_weights<I: IntoIterator<Item = (K, Ratio)>>(items: I) -> Result<Self> {
        let items: Vec<_> = items.into_iter().collect();
        let total: Ratio = items.iter().map(|(_, w)| w.clone()).sum();
        if total.is_zero() {
            return Err(Error::InvalidParameter("all weights are zero".into()));
        }
        Self::from_masses(items.into_iter().map(|(k, w)| (k, w / &total)))
    }

    pub fn point(k: K) -> Self {
        Self { masses: BTreeMap::from([(k, Ratio::one())]) }
    }

    pub fn uniform<I: IntoIterator<Item = K>>(support: I) -> Result<Self> {
        Self::from_weights(support.into_iter().map(|k| (k, Ratio::one())))
    }

    pub fn mass(&self, k: &K) -> Ratio {
        self.masses.get(k).cloned().unwrap_or_else(Ratio::zero)
    }

    pub fn total(&self) -> Ratio {
        self.masses.values().sum()
    }

    pub fn support_len(&self) -> usize {
        self.masses.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Ratio)> {
        self.masses.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.masses.keys()
    }

    pub fn event_mass<F: Fn(&K) -> bool>(&self, event: F) -> Ratio {
        self.masses.iter().filter(|(k, _)| event(k)).map(|(_, m)| m.clone()).sum()
    }

    /// Image under `f`.
    pub fn map<K2: Ord + Clone, F: Fn(&K) -> K2>(&self, f: F) -> Distribution<K2> {
        let mut masses: BTreeMap<K2, Ratio> = BTreeMap::new();
        for (k, m) in &self.masses {
            *masses.entry(f(k)).or_insert_with(Ratio::zero) += m;
        }
        Distribution { masses }
    }

    /// `sum_i w_i P_i` for weights summing to 1.
    pub fn mixture(parts: &[(Ratio, Distribution<K>)]) -> Result<Self> {
        Self::from_masses(
            parts
                .iter()
                .flat_map(|(w, d)| d.masses.iter().map(move |(k, m)| (k.clone(), w * m))),
        )
    }
}

/// Half the L1 distance over the union of supports.
pub fn statistical_distance<K: Ord + Clone>(p: &Distribution<K>, q: &Distribution<K>) -> Ratio {
    let mut sum = Ratio::zero();
    for (k, m) in p.iter() {
        let d = m - q.mass(k);
        if d > Ratio::zero() {
            sum += d;
        }
    }
    // Total masses agree, so the positive part is half the L1 norm.
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_distributions() {
        let p = Distribution::uniform(0..5).unwrap();
        assert_eq!(statistical_distance(&p, &p), Ratio::zero());
    }

    #[test]
    fn point_vs_two_point_uniform() {
        let p = Distribution::point(0);
        let q = Distribution::uniform([0, 1]).unwrap();
        assert_eq!(statistical_distance(&p, &q), ratio(1, 2));
        assert_eq!(statistical_distance(&q, &p), ratio(1, 2));
    }

    #[test]
    fn rejects_bad_totals() {
        assert!(Distribution::from_masses([(0, ratio(1, 2))]).is_err());
        assert!(Distribution::from_masses([(0, ratio(3, 2)), (1, ratio(-1, 2))]).is_err());
    }

    #[test]
    fn ratio_strings() {
        assert_eq!(ratio_string(&ratio(2, 4)), "1/2");
        assert_eq!(ratio_string(&ratio(4, 4)), "1");
        assert_eq!(parse_ratio("15/16").unwrap(), ratio(15, 16));
        assert_eq!(parse_ratio("0").unwrap(), Ratio::zero());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn mixture_and_map() {
        let a = Distribution::point(0u8);
        let b = Distribution::uniform([1u8, 2]).unwrap();
        let m = Distribution::mixture(&[(ratio(1, 2), a), (ratio(1, 2), b)]).unwrap();
        assert_eq!(m.mass(&0), ratio(1, 2));
        assert_eq!(m.mass(&2), ratio(1, 4));
        let parity = m.map(|k| k % 2);
        assert_eq!(parity.mass(&1), ratio(1, 4));
    }
}
