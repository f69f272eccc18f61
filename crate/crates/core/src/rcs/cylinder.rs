//! Closed-form bistatic RCS of a finite perfectly conducting cylinder.
//!
//! Stationary phase around the circumference and an exact integral along
//! the axis give
//!
//! ```text
//! σ = (R L² / 2) · |q_t| · sinc²(q_z L / 2),     q = k (ŝ − î)
//! ```
//!
//! where `q_t` and `q_z` are the components of the scattering vector across
//! and along the axis. At monostatic broadside `|q_t| = 2k`, giving the
//! familiar peak `2π R L² / λ`; monostatically at angle θ from the axis it
//! reduces to `k R L² sinθ sinc²(k L cosθ)`.

use crate::scene::Cylinder;

use super::{BistaticGeometry, Scatterer};

/// Below this electrical size the high-frequency form loses accuracy.
pub const MIN_ELECTRICAL_SIZE: f64 = 10.0;

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

pub fn cylinder_rcs(cyl: &Cylinder, g: &BistaticGeometry) -> f64 {
    let lambda = g.wavelength_m;
    if cyl.radius_m < MIN_ELECTRICAL_SIZE * lambda || cyl.length_m < MIN_ELECTRICAL_SIZE * lambda {
        log::warn!(
            "cylinder R = {} m, L = {} m is below {}λ; closed-form RCS is approximate",
            cyl.radius_m,
            cyl.length_m,
            MIN_ELECTRICAL_SIZE
        );
    }
    let q = g.scattering_vector();
    let q_axial = q.z;
    let q_transverse = q.x.hypot(q.y);
    let s = sinc(0.5 * q_axial * cyl.length_m);
    0.5 * cyl.radius_m * cyl.length_m * cyl.length_m * q_transverse * s * s
}

impl Scatterer for Cylinder {
    fn rcs_m2(&self, g: &BistaticGeometry) -> f64 {
        cylinder_rcs(self, g)
    }
}
