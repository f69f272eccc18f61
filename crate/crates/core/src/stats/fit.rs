//! Maximum-likelihood fits: logistic (RCS in dBsm), Weibull (path loss in
//! dB) and lognormal (excess delay).

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_finite, check_positive, mean, std_dev, StatsError};

pub const MIN_FIT_SAMPLES: usize = 8;

const MAX_ITER: usize = 200;
const GRAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Logistic,
    Weibull,
    Lognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Distribution {
    Logistic { mu: f64, s: f64 },
    /// `F(x) = 1 − exp(−(x/A)^B)`.
    Weibull { scale: f64, shape: f64 },
    /// Parameters of `ln x`.
    Lognormal { mu: f64, sigma: f64 },
}

impl Distribution {
    pub fn family(&self) -> Family {
        match self {
            Distribution::Logistic { .. } => Family::Logistic,
            Distribution::Weibull { .. } => Family::Weibull,
            Distribution::Lognormal { .. } => Family::Lognormal,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Logistic { mu, s } => 1.0 / (1.0 + (-(x - mu) / s).exp()),
            Distribution::Weibull { scale, shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            Distribution::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    0.5 * erfc(-(x.ln() - mu) / (sigma * SQRT_2))
                }
            }
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Logistic { mu, s } => {
                let z = (x - mu) / s;
                -z - 2.0 * softplus(-z) - s.ln()
            }
            Distribution::Weibull { scale, shape } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let t = x / scale;
                shape.ln() - scale.ln() + (shape - 1.0) * t.ln() - t.powf(shape)
            }
            Distribution::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let z = (x.ln() - mu) / sigma;
                -0.5 * z * z - x.ln() - sigma.ln() - 0.5 * (2.0 * PI).ln()
            }
        }
    }

    /// Inverse-CDF draw; lognormal uses Box–Muller.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = open_unit(rng);
        match *self {
            Distribution::Logistic { mu, s } => mu + s * (u / (1.0 - u)).ln(),
            Distribution::Weibull { scale, shape } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Distribution::Lognormal { mu, sigma } => {
                let v = open_unit(rng);
                let z = (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos();
                (mu + sigma * z).exp()
            }
        }
    }

    pub fn params(&self) -> [(&'static str, f64); 2] {
        match *self {
            Distribution::Logistic { mu, s } => [("mu", mu), ("s", s)],
            Distribution::Weibull { scale, shape } => [("scale", scale), ("shape", shape)],
            Distribution::Lognormal { mu, sigma } => [("mu", mu), ("sigma", sigma)],
        }
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Complementary error function (Numerical Recipes `erfcc`, |ε| < 1.2e-7).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t * (-z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
        .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub distribution: Distribution,
    pub log_likelihood: f64,
    pub sample_count: usize,
}

impl FitResult {
    fn new(distribution: Distribution, samples: &[f64]) -> Self {
        FitResult {
            distribution,
            log_likelihood: samples.iter().map(|&x| distribution.ln_pdf(x)).sum(),
            sample_count: samples.len(),
        }
    }

    pub fn family(&self) -> Family {
        self.distribution.family()
    }

    /// JSON report: `family`, `params`, `loglik`, `n`.
    pub fn to_json(&self) -> serde_json::Value {
        let params: serde_json::Map<String, serde_json::Value> = self
            .distribution
            .params()
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
            .collect();
        serde_json::json!({
            "family": self.family(),
            "params": params,
            "loglik": self.log_likelihood,
            "n": self.sample_count,
        })
    }
}

/// Per-sample mean log-likelihood of the logistic law and its derivatives
/// in `(μ, s)`.
fn logistic_terms(xs: &[f64], mu: f64, s: f64) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let n = xs.len() as f64;
    let (mut ll, mut t, mut zt, mut h, mut zh, mut z2h) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &x in xs {
        let z = (x - mu) / s;
        let th = (0.5 * z).tanh();
        let sech2 = 1.0 - th * th;
        ll += -z - 2.0 * softplus(-z);
        t += th;
        zt += z * th;
        h += 0.5 * sech2;
        zh += 0.5 * z * sech2;
        z2h += 0.5 * z * z * sech2;
    }
    let (t, zt, h, zh, z2h) = (t / n, zt / n, h / n, zh / n, z2h / n);
    let ll = ll / n - s.ln();
    let grad = [t / s, (zt - 1.0) / s];
    let s2 = s * s;
    let hmm = -h / s2;
    let hms = -(t + zh) / s2;
    let hss = -(zt - 1.0) / s2 - (zt + z2h) / s2;
    (ll, grad, [[hmm, hms], [hms, hss]])
}

/// Logistic MLE by damped Newton from the moment estimates.
pub fn fit_logistic(samples: &[f64]) -> Result<FitResult, StatsError> {
    check_finite(samples, MIN_FIT_SAMPLES)?;
    let mut mu = mean(samples);
    let sd = std_dev(samples);
    if !(sd > 0.0) {
        return Err(StatsError::Degenerate {
            family: Family::Logistic,
            location: mu,
        });
    }
    let mut s = 3f64.sqrt() * sd / PI;
    for _ in 0..MAX_ITER {
        let (ll, g, hess) = logistic_terms(samples, mu, s);
        if (g[0] * g[0] + g[1] * g[1]).sqrt() < GRAD_TOL {
            return Ok(FitResult::new(Distribution::Logistic { mu, s }, samples));
        }
        let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
        let (mut dm, mut ds) = if det > 0.0 && hess[0][0] < 0.0 {
            (
                -(hess[1][1] * g[0] - hess[0][1] * g[1]) / det,
                -(-hess[1][0] * g[0] + hess[0][0] * g[1]) / det,
            )
        } else {
            // not locally concave: fall back to scaled gradient ascent
            (g[0] * s * s, g[1] * s * s)
        };
        let mut accepted = false;
        for _ in 0..60 {
            let (nm, ns) = (mu + dm, s + ds);
            if ns > 0.0 && logistic_terms(samples, nm, ns).0 >= ll - 1e-15 * ll.abs() {
                mu = nm;
                s = ns;
                accepted = true;
                break;
            }
            dm *= 0.5;
            ds *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(StatsError::NonConvergence {
        family: Family::Logistic,
        iterations: MAX_ITER,
        last: vec![mu, s],
    })
}

/// Weibull profile-likelihood sums over `y = x / max(x)`.
struct WeibullProfile {
    ln_y: Vec<f64>,
    mean_ln_y: f64,
}

impl WeibullProfile {
    /// Score `g(B)` and `g'(B)`; the MLE shape is the root of `g`.
    fn eval(&self, shape: f64) -> (f64, f64, f64) {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in &self.ln_y {
            let w = (shape * l).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        let g = s1 / s0 - 1.0 / shape - self.mean_ln_y;
        let dg = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (shape * shape);
        (g, dg, s0)
    }
}

/// Weibull MLE: Newton on the profile score for the shape (bracketed, with
/// bisection fallback), closed-form scale given the shape.
pub fn fit_weibull(samples: &[f64]) -> Result<FitResult, StatsError> {
    check_finite(samples, MIN_FIT_SAMPLES)?;
    check_positive(samples)?;
    let xmax = samples.iter().cloned().fold(f64::MIN, f64::max);
    let ln_y: Vec<f64> = samples.iter().map(|x| (x / xmax).ln()).collect();
    let profile = WeibullProfile {
        mean_ln_y: mean(&ln_y),
        ln_y,
    };
    let fail = |last: f64| StatsError::NonConvergence {
        family: Family::Weibull,
        iterations: MAX_ITER,
        last: vec![last],
    };

    // bracket the root: g → −∞ as B → 0 and g is increasing
    let mut lo = 1e-3;
    let mut hi = 1.0;
    let mut iters = 0;
    while profile.eval(hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
        iters += 1;
        if iters > 40 {
            return Err(fail(hi));
        }
    }
    if profile.eval(lo).0 > 0.0 {
        return Err(fail(lo));
    }

    let mut b = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let (g, dg, s0) = profile.eval(b);
        if g.abs() < 1e-12 || (hi - lo) < 1e-14 * b {
            let scale = xmax * (s0 / samples.len() as f64).powf(1.0 / b);
            return Ok(FitResult::new(Distribution::Weibull { scale, shape: b }, samples));
        }
        if g < 0.0 {
            lo = b;
        } else {
            hi = b;
        }
        let newton = b - g / dg;
        b = if dg > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(fail(b))
}

/// Lognormal MLE: mean and (population) standard deviation of `ln x`.
pub fn fit_lognormal(samples: &[f64]) -> Result<FitResult, StatsError> {
    check_finite(samples, MIN_FIT_SAMPLES)?;
    check_positive(samples)?;
    let logs: Vec<f64> = samples.iter().map(|x| x.ln()).collect();
    let mu = mean(&logs);
    let sigma = std_dev(&logs);
    if !(sigma > 0.0) {
        return Err(StatsError::Degenerate {
            family: Family::Lognormal,
            location: mu,
        });
    }
    Ok(FitResult::new(Distribution::Lognormal { mu, sigma }, samples))
}
