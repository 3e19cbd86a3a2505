use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::ensembles::{SeedPolicy, Stream, StreamRng};
use crate::error::{Error, Result};

/// Fraction of non-finite draws tolerated before a run is declared invalid.
pub const MAX_EXCLUDED_FRACTION: f64 = 1e-3;
pub const MIN_TRIALS: usize = 100;
pub const CONFIDENCE: f64 = 0.95;

/// Empirical `Pr(statistic >= theta)` with a 95% Clopper-Pearson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub theta: f64,
    pub trials: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TailEstimate {
    pub fn from_counts(theta: f64, hits: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = clopper_pearson(hits, trials, CONFIDENCE);
        let p_hat = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        Self { theta, trials, hits, p_hat, ci_low, ci_high }
    }
}

/// Exact binomial interval for `hits` successes in `trials`.
pub fn clopper_pearson(hits: usize, trials: usize, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - confidence;
    let (h, n) = (hits as f64, trials as f64);
    let low = if hits == 0 {
        0.0
    } else {
        Beta::new(h, n - h + 1.0).map_or(0.0, |b| b.inverse_cdf(alpha / 2.0))
    };
    let high = if hits >= trials {
        1.0
    } else {
        Beta::new(h + 1.0, n - h).map_or(1.0, |b| b.inverse_cdf(1.0 - alpha / 2.0))
    };
    let p = h / n;
    (low.clamp(0.0, p), high.clamp(p, 1.0))
}

/// Tail estimates at every grid point from already drawn finite values.
pub fn tails_from_values(values: &[f64], theta_grid: &[f64]) -> Vec<TailEstimate> {
    theta_grid
        .iter()
        .map(|&theta| TailEstimate::from_counts(theta, values.iter().filter(|&&v| v >= theta).count(), values.len()))
        .collect()
}

/// Finite draws of a statistic plus the number of excluded non-finite draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draws {
    pub values: Vec<f64>,
    pub excluded: usize,
}

/// Evaluate `statistic` on `trials` substreams of `stream`, in trial order.
/// Non-finite draws are excluded and counted; more than 0.1% is an error.
pub fn draw_statistic<F>(statistic: F, trials: usize, seeds: &SeedPolicy, stream: Stream) -> Result<Draws>
where
    F: Fn(&mut StreamRng) -> Result<f64> + Sync,
{
    let raw: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| statistic(&mut seeds.rng(stream, i)))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = raw.iter().copied().filter(|v| v.is_finite()).collect();
    let excluded = trials - values.len();
    if excluded as f64 > MAX_EXCLUDED_FRACTION * trials as f64 {
        return Err(Error::TooManyExcluded { excluded, trials });
    }
    Ok(Draws { values, excluded })
}

/// Monte Carlo tail of `statistic` over `theta_grid`, deterministic under `seeds`.
pub fn empirical_tail<F>(statistic: F, theta_grid: &[f64], trials: usize, seeds: &SeedPolicy) -> Result<(Vec<TailEstimate>, usize)>
where
    F: Fn(&mut StreamRng) -> Result<f64> + Sync,
{
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let draws = draw_statistic(statistic, trials, seeds, Stream::Evaluation)?;
    Ok((tails_from_values(&draws.values, theta_grid), draws.excluded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn constant_statistic() {
        let seeds = SeedPolicy::new(1);
        let (t, _) = empirical_tail(|_| Ok(5.0), &[4.0, 6.0], 100, &seeds).unwrap();
        assert_eq!((t[0].p_hat, t[1].p_hat), (1.0, 0.0));
        assert_eq!(t[0].ci_high, 1.0);
        assert_eq!(t[1].ci_low, 0.0);
    }

    #[test]
    fn interval_brackets_estimate() {
        // Known value: 5 of 10 gives roughly (0.187, 0.813).
        let (lo, hi) = clopper_pearson(5, 10, 0.95);
        assert!((lo - 0.187_086).abs() < 1e-5 && (hi - 0.812_914).abs() < 1e-5);
        for (h, n) in [(0, 7), (7, 7), (1, 1000), (999, 1000)] {
            let (lo, hi) = clopper_pearson(h, n, 0.95);
            let p = h as f64 / n as f64;
            assert!(lo <= p && p <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0);
        }
    }

    #[test]
    fn excluded_draws_are_capped() {
        let seeds = SeedPolicy::new(2);
        let too_many = draw_statistic(|r| Ok(if r.random::<f64>() < 0.01 { f64::NAN } else { 1.0 }), 1000, &seeds, Stream::Evaluation);
        assert!(matches!(too_many, Err(Error::TooManyExcluded { .. })));
        assert!(empirical_tail(|_| Ok(1.0), &[0.0], 99, &seeds).is_err());
    }
}
