//! Deterministic and quasi-deterministic ray tracing of a mmWave street
//! canyon, with the statistics needed to compare the two.
//!
//! The deterministic tracer (D-RT) evaluates the exact bistatic RCS of every
//! scatterer; the quasi-deterministic tracer (QD-RT) replaces it with a draw
//! from a logistic law fitted to an RCS dataset. [`montecarlo`] runs both
//! over random placements and [`stats`] tests whether the resulting path
//! loss and delay distributions agree.

pub mod cli;
pub mod coverage;
pub mod em;
pub mod geometry;
pub mod montecarlo;
pub mod placement;
pub mod raytrace;
pub mod rcs;
pub mod rng;
pub mod scene;
pub mod stats;

pub use geometry::Vec3;
pub use scene::{load_scene, BoxObject, Cylinder, ObjectKind, Scene};
