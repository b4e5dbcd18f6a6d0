//! Estimation statistics: Wilson intervals for win probabilities and a
//! chi-square uniformity check for sampled keys.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Monte Carlo estimate of a win probability with a 95% Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdvantageEstimate {
    pub trials: u64,
    pub wins: u64,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl AdvantageEstimate {
    pub fn from_counts(wins: u64, trials: u64) -> Self {
        assert!(trials >= 1);
        assert!(wins <= trials);
        let (ci_low, ci_high) = wilson_interval(wins, trials, 1.959_963_984_540_054);
        AdvantageEstimate {
            trials,
            wins,
            mean: wins as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(wins: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = wins as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()) / denom;
    let mut low = (center - half).max(0.0);
    let mut high = (center + half).min(1.0);
    // center - half is exactly zero at p = 0 (and symmetrically at p = 1)
    // up to floating-point dust; snap it
    if low < 1e-12 {
        low = 0.0;
    }
    if high > 1.0 - 1e-12 {
        high = 1.0;
    }
    (low, high)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u64,
    pub critical: f64,
    pub significance: f64,
    pub pass: bool,
}

/// Test observed bin counts against the uniform expectation at the given
/// significance level; `pass` means uniformity is not rejected.
pub fn chi_square_uniform(counts: &[u64], significance: f64) -> ChiSquareResult {
    assert!(counts.len() >= 2);
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = (counts.len() - 1) as u64;
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    let critical = dist.inverse_cdf(1.0 - significance);
    ChiSquareResult {
        statistic,
        dof,
        critical,
        significance,
        pass: statistic <= critical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn wilson_width_at_half() {
        // n = 1000, p = 0.5: interval width just over 0.06
        let e = AdvantageEstimate::from_counts(500, 1000);
        let width = e.ci_high - e.ci_low;
        assert!((width - 0.0616).abs() < 0.002, "width {width}");
        assert!(e.ci_low <= e.mean && e.mean <= e.ci_high);
    }

    #[test]
    fn wilson_stays_in_unit_interval() {
        let e = AdvantageEstimate::from_counts(0, 50);
        assert!(e.ci_low >= 0.0);
        let f = AdvantageEstimate::from_counts(50, 50);
        assert!(f.ci_high <= 1.0);
    }

    #[test]
    fn chi_square_accepts_uniform_rejects_skewed() {
        let mut rng = RngStream::new(20, 0);
        let mut counts = vec![0u64; 64];
        for _ in 0..64_000 {
            counts[rng.below(64) as usize] += 1;
        }
        assert!(chi_square_uniform(&counts, 0.01).pass);

        let mut skewed = vec![1000u64; 64];
        skewed[0] = 3000;
        assert!(!chi_square_uniform(&skewed, 0.01).pass);
    }
}
