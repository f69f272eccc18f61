//! Oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use qdrt::coverage::{coverage_pdf, CoverageParams};
use rand::Rng;

/// Composite Simpson on `[lo, hi]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// `∫∫ g(θ) f(θ, φ) dθ dφ` with the θ-range at each φ taken from the
/// support bounds and Simpson in θ on the open interval.
pub fn integrate_coverage(p: &CoverageParams, g: impl Fn(f64) -> f64 + Copy, n_phi: usize) -> f64 {
    let dphi = TAU / n_phi as f64;
    (0..n_phi)
        .map(|i| {
            let phi = (i as f64 + 0.5) * dphi;
            match p.theta_bounds(phi) {
                None => 0.0,
                Some((lo, hi)) => {
                    let eps = 1e-12 * (hi - lo);
                    simpson(|t| g(t) * coverage_pdf(p, t, phi), lo + eps, hi - eps, 200)
                }
            }
        })
        .sum::<f64>()
        * dphi
}

/// Draws from the density alone by rejection from a bounding box in
/// (θ, φ); knows nothing about the ground geometry.
pub struct RejectionSampler {
    params: CoverageParams,
    t_hi: f64,
    f_max: f64,
}

impl RejectionSampler {
    pub fn new(params: CoverageParams) -> Self {
        // the density grows with θ, so its maximum sits at the far corner
        let half = 0.5 * params.canyon_length_m;
        let t_hi = half.hypot(params.strip_far_m).atan2(params.delta_z_m.abs());
        let f_max = 1.01 * coverage_pdf(&params, t_hi - 1e-9, (params.strip_far_m / half).atan() + 1e-9);
        assert!(f_max > 0.0);
        RejectionSampler { params, t_hi, f_max }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> (f64, f64) {
        loop {
            let t = rng.random_range(0.0..self.t_hi);
            let f = rng.random_range(0.0..TAU);
            let u = rng.random_range(0.0..self.f_max);
            if u < coverage_pdf(&self.params, t, f) {
                return (t, f);
            }
        }
    }
}
