//! Bistatic radar cross section of the canyon scatterers.
//!
//! * [`cylinder`]: closed-form finite PEC cylinder (lampposts).
//! * [`po`]: Physical Optics over flat conducting facets, with the surface
//!   integral reduced to an edge sum (pedestrians and cars as boxes).
//! * [`dataset`]: angle-swept RCS datasets for distribution fitting.

pub mod cylinder;
pub mod dataset;
pub mod po;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

pub use cylinder::cylinder_rcs;
pub use dataset::{generate_rcs_dataset, AngleSource, CoverageAngles, PlacementAngles, RcsDataset};
pub use po::{mesh_rcs, po_polygon_field, FacetMesh, Polygon};

/// σ below this (−100 dBsm) is clamped so dBsm values stay finite.
pub const RCS_FLOOR_M2: f64 = 1e-10;

const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum RcsError {
    #[error("direction vector is not unit-norm (|v| = {0})")]
    NotUnit(f64),
    #[error("scatterer coincides with an antenna")]
    Coincident,
    #[error("mesh has no facets")]
    EmptyMesh,
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not planar (deviation {0:e} m)")]
    NonPlanar(f64),
    #[error("wavelength must be positive")]
    Wavelength,
}

/// Incident and scattered propagation directions at the scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BistaticGeometry {
    /// Propagation direction of the incident wave (TX toward scatterer).
    pub incident_direction: Vec3,
    /// Propagation direction of the scattered wave (scatterer toward RX).
    pub scattered_direction: Vec3,
    pub wavelength_m: f64,
}

impl BistaticGeometry {
    pub fn new(incident: Vec3, scattered: Vec3, wavelength_m: f64) -> Result<Self, RcsError> {
        for v in [incident, scattered] {
            let n = v.norm();
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(RcsError::NotUnit(n));
            }
        }
        if !(wavelength_m > 0.0) {
            return Err(RcsError::Wavelength);
        }
        Ok(BistaticGeometry {
            incident_direction: incident,
            scattered_direction: scattered,
            wavelength_m,
        })
    }

    pub fn from_positions(tx: Vec3, target: Vec3, rx: Vec3, wavelength_m: f64) -> Result<Self, RcsError> {
        let a = target - tx;
        let b = rx - target;
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(RcsError::Coincident);
        }
        Self::new(a.normalized(), b.normalized(), wavelength_m)
    }

    /// Monostatic geometry: the wave returns along its arrival path.
    pub fn monostatic(incident: Vec3, wavelength_m: f64) -> Result<Self, RcsError> {
        Self::new(incident, -incident, wavelength_m)
    }

    /// The reciprocal path: transmit from the receiver.
    pub fn reversed(&self) -> Self {
        BistaticGeometry {
            incident_direction: -self.scattered_direction,
            scattered_direction: -self.incident_direction,
            wavelength_m: self.wavelength_m,
        }
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_m
    }

    /// Scattering vector `k (ŝ − î)`.
    pub fn scattering_vector(&self) -> Vec3 {
        (self.scattered_direction - self.incident_direction) * self.wavenumber()
    }
}

/// Anything with a bistatic RCS.
pub trait Scatterer: Sync {
    fn rcs_m2(&self, g: &BistaticGeometry) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcsSample {
    pub geometry: BistaticGeometry,
    pub rcs_dbsm: f64,
}

/// Converts σ to dBsm, clamping at [`RCS_FLOOR_M2`]. The flag reports
/// whether the floor was applied.
pub fn to_dbsm(sigma_m2: f64) -> (f64, bool) {
    if sigma_m2 < RCS_FLOOR_M2 || !sigma_m2.is_finite() {
        (10.0 * RCS_FLOOR_M2.log10(), true)
    } else {
        (10.0 * sigma_m2.log10(), false)
    }
}
