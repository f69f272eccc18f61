//! Angular coverage density of objects spread uniformly over the sidewalk
//! strips, as seen from an antenna `Δz` above the object reference plane.
//!
//! An object at horizontal offset `(x, y)` from the antenna foot is seen at
//! polar angle `θ` (from nadir) and azimuth `φ` with `Δz tanθ = √(x²+y²)`.
//! Uniform placement over two mirror strips `a < |y| < b`, `|x| < L1/2`
//! (total area `2 L1 W2`) maps to
//!
//! ```text
//! f(θ, φ) = Δz² sinθ / (2 L1 W2 cos³θ)
//! ```
//!
//! on the exact image of the strips:
//! `arctan(a / (Δz |sinφ|)) < θ < arctan(b / (Δz |sinφ|))`,
//! `Δz tanθ |cosφ| < L1/2`, which confines `φ` to `(φ0, π − φ0)` and its
//! mirror with `φ0 = arctan(2a / L1)`.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoverageError {
    #[error("strip bounds must satisfy 0 < a < b (a = {0}, b = {1})")]
    StripBounds(f64, f64),
    #[error("canyon length must be positive")]
    Length,
    #[error("height difference Δz must be non-zero")]
    HeightDifference,
    #[error("strip width {w} inconsistent with b − a = {span}")]
    StripWidth { w: f64, span: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageParams {
    pub delta_z_m: f64,
    pub strip_near_m: f64,
    pub strip_far_m: f64,
    pub canyon_length_m: f64,
    pub strip_width_m: f64,
    pub phi0_rad: f64,
}

impl CoverageParams {
    pub fn new(delta_z_m: f64, strip_near_m: f64, strip_far_m: f64, canyon_length_m: f64) -> Result<Self, CoverageError> {
        let p = CoverageParams {
            delta_z_m,
            strip_near_m,
            strip_far_m,
            canyon_length_m,
            strip_width_m: strip_far_m - strip_near_m,
            phi0_rad: (2.0 * strip_near_m / canyon_length_m).atan(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CoverageError> {
        let (a, b) = (self.strip_near_m, self.strip_far_m);
        if !(a > 0.0 && a < b) {
            return Err(CoverageError::StripBounds(a, b));
        }
        if !(self.canyon_length_m > 0.0) {
            return Err(CoverageError::Length);
        }
        if self.delta_z_m == 0.0 || !self.delta_z_m.is_finite() {
            return Err(CoverageError::HeightDifference);
        }
        let span = b - a;
        if (self.strip_width_m - span).abs() > 1e-12 * span.max(1.0) {
            return Err(CoverageError::StripWidth {
                w: self.strip_width_m,
                span,
            });
        }
        Ok(())
    }

    fn height(&self) -> f64 {
        self.delta_z_m.abs()
    }

    /// Support predicate in angle space.
    pub fn contains(&self, theta: f64, phi: f64) -> bool {
        if !(theta > 0.0 && theta < 0.5 * PI) {
            return false;
        }
        let rho = self.height() * theta.tan();
        let y = (rho * phi.sin()).abs();
        let x = (rho * phi.cos()).abs();
        y > self.strip_near_m && y < self.strip_far_m && x < 0.5 * self.canyon_length_m
    }

    /// Interval of θ inside the support at azimuth `φ`, if any.
    pub fn theta_bounds(&self, phi: f64) -> Option<(f64, f64)> {
        let h = self.height();
        let s = phi.sin().abs();
        let c = phi.cos().abs();
        if s == 0.0 {
            return None;
        }
        let lo = (self.strip_near_m / (h * s)).atan();
        let mut hi = (self.strip_far_m / (h * s)).atan();
        if c > 0.0 {
            hi = hi.min((0.5 * self.canyon_length_m / (h * c)).atan());
        }
        (hi > lo).then_some((lo, hi))
    }
}

/// Coverage density; zero outside the support.
pub fn coverage_pdf(params: &CoverageParams, theta: f64, phi: f64) -> f64 {
    if !params.contains(theta, phi) {
        return 0.0;
    }
    let dz = params.delta_z_m;
    let c = theta.cos();
    dz * dz * theta.sin() / (2.0 * params.canyon_length_m * params.strip_width_m * c * c * c)
}

/// Uniform ground point over the two strips, as an `(x, y)` offset.
pub fn sample_strip_point<R: Rng + ?Sized>(params: &CoverageParams, rng: &mut R) -> (f64, f64) {
    let half = 0.5 * params.canyon_length_m;
    let x = rng.random_range(-half..half);
    let y = rng.random_range(params.strip_near_m..params.strip_far_m);
    let y = if rng.random_bool(0.5) { y } else { -y };
    (x, y)
}

/// Draws `(θ, φ)` from [`coverage_pdf`] by uniform placement and exact
/// conversion to angles.
pub fn sample_coverage<R: Rng + ?Sized>(params: &CoverageParams, rng: &mut R) -> (f64, f64) {
    let (x, y) = sample_strip_point(params, rng);
    offset_to_angles(params.height(), x, y)
}

/// Polar (from nadir) and azimuth angles of a ground offset.
pub fn offset_to_angles(height: f64, x: f64, y: f64) -> (f64, f64) {
    let theta = x.hypot(y).atan2(height);
    let phi = y.atan2(x).rem_euclid(TAU);
    (theta, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    fn params() -> CoverageParams {
        CoverageParams::new(2.5, 2.0, 4.0, 150.0).unwrap()
    }

    #[test]
    fn outside_support_is_zero() {
        let p = params();
        assert_eq!(coverage_pdf(&p, 0.01, 1.0), 0.0);
        assert_eq!(coverage_pdf(&p, 1.0, 0.5 * p.phi0_rad), 0.0);
        assert_eq!(coverage_pdf(&p, 1.0, PI - 0.5 * p.phi0_rad), 0.0);
        assert_eq!(coverage_pdf(&p, 1.55, 0.5 * PI), 0.0);
    }

    #[test]
    fn density_ratio_cancels_parameters() {
        let p = params();
        let (t1, t2, phi) = (0.8, 1.0, 0.5 * PI);
        let r = coverage_pdf(&p, t1, phi) / coverage_pdf(&p, t2, phi);
        let expected = t1.sin() * t2.cos().powi(3) / (t2.sin() * t1.cos().powi(3));
        assert!((r - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn samples_stay_in_support() {
        let p = params();
        let mut rng = substream(1, Purpose::Reference, 0);
        for _ in 0..10_000 {
            let (t, f) = sample_coverage(&p, &mut rng);
            assert!(p.contains(t, f), "θ={t} φ={f}");
            assert!(coverage_pdf(&p, t, f) > 0.0);
        }
    }

    #[test]
    fn theta_bounds_agree_with_predicate() {
        let p = params();
        for i in 1..400 {
            let phi = TAU * i as f64 / 400.0;
            if let Some((lo, hi)) = p.theta_bounds(phi) {
                let mid = 0.5 * (lo + hi);
                assert!(p.contains(mid, phi));
                assert!(!p.contains(lo - 1e-9, phi));
                assert!(!p.contains(hi + 1e-9, phi));
            }
        }
    }

    #[test]
    fn phi0_is_arctan_form() {
        let p = params();
        assert!((p.phi0_rad - (4.0f64 / 150.0).atan()).abs() < 1e-15);
        assert!(p.theta_bounds(0.999 * p.phi0_rad).is_none());
    }

    #[test]
    fn invalid_params() {
        assert_eq!(CoverageParams::new(2.5, 0.0, 2.0, 150.0), Err(CoverageError::StripBounds(0.0, 2.0)));
        assert_eq!(CoverageParams::new(0.0, 1.0, 2.0, 150.0), Err(CoverageError::HeightDifference));
        let mut p = params();
        p.strip_width_m = 3.0;
        assert!(matches!(p.validate(), Err(CoverageError::StripWidth { .. })));
    }
}
