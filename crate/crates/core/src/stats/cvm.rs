//! Two-sample Cramér–von Mises test (Anderson's rank form).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_finite, StatsError};
use crate::rng::{substream, Purpose};

pub const DEFAULT_PERMUTATIONS: usize = 9_999;
pub const MIN_GOF_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Pass,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    #[serde(rename = "T")]
    pub statistic: f64,
    /// Permutation p-value, or the asymptotic one when no permutations ran.
    pub p_value: f64,
    pub p_value_asymptotic: f64,
    pub n_permutations: usize,
    pub alpha: f64,
    /// `Pass` iff `p_value > alpha`.
    pub decision: Decision,
}

impl GofResult {
    pub fn passed(&self) -> bool {
        self.decision == Decision::Pass
    }
}

/// Pooled sample in ascending order with mid-ranks for ties.
struct Pooled {
    /// Index into the concatenation `x ++ y`, ascending by value.
    order: Vec<usize>,
    /// Average rank of `order[k]`.
    ranks: Vec<f64>,
}

impl Pooled {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let values: Vec<f64> = x.iter().chain(y).copied().collect();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut ranks = vec![0.0; order.len()];
        let mut start = 0;
        while start < order.len() {
            let mut end = start + 1;
            while end < order.len() && values[order[end]] == values[order[start]] {
                end += 1;
            }
            let mid = (start + end + 1) as f64 / 2.0;
            ranks[start..end].fill(mid);
            start = end;
        }
        Pooled { order, ranks }
    }

    /// Statistic with `in_x(idx)` deciding which sample each pooled element
    /// belongs to.
    fn statistic(&self, nx: usize, ny: usize, in_x: impl Fn(usize) -> bool) -> f64 {
        let (mut i, mut j) = (0.0, 0.0);
        let (mut sx, mut sy) = (0.0, 0.0);
        for (&idx, &r) in self.order.iter().zip(&self.ranks) {
            if in_x(idx) {
                i += 1.0;
                sx += (r - i) * (r - i);
            } else {
                j += 1.0;
                sy += (r - j) * (r - j);
            }
        }
        let (n, m) = (nx as f64, ny as f64);
        let u = n * sx + m * sy;
        u / (n * m * (n + m)) - (4.0 * m * n - 1.0) / (6.0 * (m + n))
    }
}

/// Two-sample CvM statistic `T`.
pub fn cvm_statistic(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_finite(x, 1)?;
    check_finite(y, 1)?;
    let nx = x.len();
    Ok(Pooled::new(x, y).statistic(nx, y.len(), |i| i < nx))
}

/// CvM test of `x` and `y` coming from one distribution. The permutation
/// p-value is `(1 + #{T_b ≥ T}) / (1 + B)`, permutation `b` drawing from
/// substream `(seed, Permutation, b)`. `n_permutations = 0` uses the
/// asymptotic p-value only.
pub fn cvm_two_sample(
    x: &[f64],
    y: &[f64],
    n_permutations: usize,
    seed: u64,
    alpha: f64,
) -> Result<GofResult, StatsError> {
    check_finite(x, MIN_GOF_SAMPLES)?;
    check_finite(y, MIN_GOF_SAMPLES)?;
    let (nx, ny) = (x.len(), y.len());
    let pooled = Pooled::new(x, y);
    let statistic = pooled.statistic(nx, ny, |i| i < nx);
    let p_value_asymptotic = asymptotic_p_value(statistic, nx, ny);

    let p_value = if n_permutations == 0 {
        p_value_asymptotic
    } else {
        // guard against rounding in the comparison of equal statistics
        let threshold = statistic - 1e-12 * statistic.abs().max(1.0);
        let exceed: usize = (0..n_permutations)
            .into_par_iter()
            .map(|b| {
                let mut rng = substream(seed, Purpose::Permutation, b as u64);
                let mut mask = vec![false; nx + ny];
                for k in rand::seq::index::sample(&mut rng, nx + ny, nx) {
                    mask[k] = true;
                }
                usize::from(pooled.statistic(nx, ny, |i| mask[i]) >= threshold)
            })
            .sum();
        (1 + exceed) as f64 / (1 + n_permutations) as f64
    };

    Ok(GofResult {
        statistic,
        p_value,
        p_value_asymptotic,
        n_permutations,
        alpha,
        decision: if p_value > alpha {
            Decision::Pass
        } else {
            Decision::Reject
        },
    })
}

/// Standardize `T` by its exact finite-sample mean and variance and refer it
/// to the limiting one-sample distribution.
pub fn asymptotic_p_value(t: f64, nx: usize, ny: usize) -> f64 {
    let (n, m) = (nx as f64, ny as f64);
    let k = n * m;
    let total = n + m;
    let et = (1.0 + 1.0 / total) / 6.0;
    let vt = (total + 1.0) * (4.0 * k * total - 3.0 * (n * n + m * m) - 2.0 * k) / (45.0 * total * total * 4.0 * k);
    let tn = 1.0 / 6.0 + (t - et) / (45.0 * vt).sqrt();
    if tn < 0.003 {
        1.0
    } else {
        (1.0 - cvm_limit_cdf(tn)).max(0.0)
    }
}

/// CDF of the limiting CvM distribution, as a series in modified Bessel
/// functions `K_{1/4}`.
pub fn cvm_limit_cdf(x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let mut total = 0.0;
    // Γ(k + 1/2) / Γ(k + 1), starting from √π at k = 0
    let mut gamma_ratio = PI.sqrt();
    for k in 0..200 {
        let kf = k as f64;
        let y = 4.0 * kf + 1.0;
        let q = y * y / (16.0 * x);
        let term = gamma_ratio / (PI.powf(1.5) * x.sqrt()) * y.sqrt() * scaled_bessel_k_quarter(q);
        total += term;
        if term.abs() < 1e-7 {
            break;
        }
        gamma_ratio *= (kf + 0.5) / (kf + 1.0);
    }
    total.min(1.0)
}

/// `e^{−q} K_{1/4}(q)` from `K_ν(q) = ∫₀^∞ e^{−q cosh t} cosh(νt) dt`. The
/// integrand decays doubly exponentially, so the trapezoid rule converges
/// geometrically in the step.
fn scaled_bessel_k_quarter(q: f64) -> f64 {
    let upper = (1.0 + 60.0 / q).acosh() + 1.0;
    let steps = 2000;
    let h = upper / steps as f64;
    let f = |t: f64| (-q * (t.cosh() - 1.0)).exp() * (0.25 * t).cosh();
    let mut s = 0.5 * (f(0.0) + f(upper));
    for i in 1..steps {
        s += f(i as f64 * h);
    }
    (-2.0 * q).exp() * s * h
}
