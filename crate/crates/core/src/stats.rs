//! Binomial confidence bounds and a chi-square uniformity check.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

/// Exact two-sided Clopper–Pearson interval at confidence `1 - alpha`.
pub fn clopper_pearson(successes: u64, trials: u64, alpha: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let (k, n) = (successes as f64, trials as f64);
    let low = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (low, high)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BinomialEstimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(successes, trials, 0.05);
        Self {
            trials,
            successes,
            estimate: successes as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }
}

/// Pearson chi-square statistic and p-value against equal cell counts.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let cells = counts.len() as f64;
    let expected = total as f64 / cells;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    if counts.len() < 2 {
        return (stat, 1.0);
    }
    let dist = ChiSquared::new(cells - 1.0).unwrap();
    (stat, 1.0 - dist.cdf(stat))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_successes_lower_bound() {
        let (lo, hi) = clopper_pearson(100, 100, 0.05);
        assert!((lo - 0.025f64.powf(1.0 / 100.0)).abs() < 1e-9);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn interval_contains_estimate() {
        for (k, n) in [(0, 10), (3, 10), (50, 100), (999, 1000)] {
            let e = BinomialEstimate::new(k, n);
            assert!(e.ci_low <= e.estimate && e.estimate <= e.ci_high);
        }
        let (lo, hi) = clopper_pearson(5, 10, 0.05);
        // Reference values for Clopper-Pearson 5/10.
        assert!((lo - 0.187086).abs() < 1e-5);
        assert!((hi - 0.812914).abs() < 1e-5);
    }

    #[test]
    fn chi_square_flat_counts() {
        let (stat, p) = chi_square_uniform(&[100, 100, 100, 100]);
        assert_eq!(stat, 0.0);
        assert!(p > 0.99);
        let (_, p) = chi_square_uniform(&[400, 0, 0, 0]);
        assert!(p < 1e-10);
    }
}
