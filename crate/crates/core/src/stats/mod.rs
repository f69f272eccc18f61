//! Distribution fitting and two-sample goodness-of-fit.

pub mod cvm;
pub mod fit;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cvm::{cvm_statistic, cvm_two_sample, Decision, GofResult, DEFAULT_PERMUTATIONS, MIN_GOF_SAMPLES};
pub use fit::{fit_logistic, fit_lognormal, fit_weibull, Distribution, Family, FitResult, MIN_FIT_SAMPLES};

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
pub enum StatsError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("sample {index} = {value} is not finite")]
    NonFinite { index: usize, value: f64 },
    #[error("sample {index} = {value} is not positive")]
    NonPositive { index: usize, value: f64 },
    #[error("{family:?} fit is degenerate (zero spread at location {location})")]
    Degenerate { family: Family, location: f64 },
    #[error("{family:?} MLE did not converge after {iterations} iterations (last iterate {last:?})")]
    NonConvergence {
        family: Family,
        iterations: usize,
        last: Vec<f64>,
    },
}

pub(crate) fn check_finite(samples: &[f64], min: usize) -> Result<(), StatsError> {
    if samples.len() < min {
        return Err(StatsError::TooFewSamples {
            min,
            got: samples.len(),
        });
    }
    if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(StatsError::NonFinite { index, value });
    }
    Ok(())
}

pub(crate) fn check_positive(samples: &[f64]) -> Result<(), StatsError> {
    if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(StatsError::NonPositive { index, value });
    }
    Ok(())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Linear-interpolated quantile of unsorted data, `q ∈ [0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// CvM test of `samples` against an equally sized synthetic sample drawn
/// from `dist` (substream `(seed, Reference, 0)`). Using fitted parameters
/// makes the test conservative.
pub fn fit_gof(
    samples: &[f64],
    dist: &Distribution,
    n_permutations: usize,
    seed: u64,
    alpha: f64,
) -> Result<GofResult, StatsError> {
    let mut rng = crate::rng::substream(seed, crate::rng::Purpose::Reference, 0);
    let synthetic: Vec<f64> = (0..samples.len()).map(|_| dist.sample(&mut rng)).collect();
    cvm_two_sample(samples, &synthetic, n_permutations, seed, alpha)
}
