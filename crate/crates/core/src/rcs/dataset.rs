//! Angle-swept bistatic RCS datasets.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coverage::{sample_coverage, CoverageParams};
use crate::geometry::Vec3;
use crate::placement::PlacementRegion;
use crate::rng::{substream, Purpose};

use super::{to_dbsm, BistaticGeometry, RcsSample, Scatterer};

pub const CSV_HEADER: [&str; 5] = ["theta_i", "phi_i", "theta_s", "phi_s", "rcs_dbsm"];

/// Source of bistatic geometries for dataset generation.
pub trait AngleSource: Sync {
    fn sample_geometry(&self, rng: &mut ChaCha8Rng) -> BistaticGeometry;
}

/// Joint geometry of an object placed uniformly over `region`: the incident
/// and scattered angles are those toward the actual TX and RX positions, so
/// each side individually follows its coverage density.
#[derive(Debug, Clone)]
pub struct PlacementAngles {
    pub tx: Vec3,
    pub rx: Vec3,
    pub region: PlacementRegion,
    pub wavelength_m: f64,
}

impl AngleSource for PlacementAngles {
    fn sample_geometry(&self, rng: &mut ChaCha8Rng) -> BistaticGeometry {
        loop {
            let p = self.region.sample(rng);
            if let Ok(g) = BistaticGeometry::from_positions(self.tx, p, self.rx, self.wavelength_m) {
                return g;
            }
        }
    }
}

/// Incident and scattered angles drawn independently, each from its own
/// coverage density.
#[derive(Debug, Clone)]
pub struct CoverageAngles {
    pub tx: CoverageParams,
    pub rx: CoverageParams,
    pub wavelength_m: f64,
}

/// Unit vector from an antenna toward a point seen at `(θ, φ)`; the point
/// lies below the antenna when `delta_z > 0`.
fn look_direction(theta: f64, phi: f64, delta_z: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(st * cp, st * sp, -ct * delta_z.signum())
}

impl AngleSource for CoverageAngles {
    fn sample_geometry(&self, rng: &mut ChaCha8Rng) -> BistaticGeometry {
        let (ti, pi) = sample_coverage(&self.tx, rng);
        let (ts, ps) = sample_coverage(&self.rx, rng);
        let inc = look_direction(ti, pi, self.tx.delta_z_m);
        let sc = -look_direction(ts, ps, self.rx.delta_z_m);
        BistaticGeometry {
            incident_direction: inc,
            scattered_direction: sc,
            wavelength_m: self.wavelength_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcsDataset {
    pub samples: Vec<RcsSample>,
    /// Samples whose σ was clamped to the floor.
    pub floored: usize,
}

impl RcsDataset {
    pub fn rcs_dbsm(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rcs_dbsm).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for s in &self.samples {
            let (ti, pi) = s.geometry.incident_direction.spherical_angles();
            let (ts, ps) = s.geometry.scattered_direction.spherical_angles();
            w.write_record([ti, pi, ts, ps, s.rcs_dbsm].map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `count` samples; sample `i` uses substream `(seed, Dataset, i)`.
pub fn generate_rcs_dataset<S, A>(scatterer: &S, source: &A, count: usize, seed: u64) -> RcsDataset
where
    S: Scatterer + ?Sized,
    A: AngleSource + ?Sized,
{
    let drawn: Vec<(RcsSample, bool)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, Purpose::Dataset, i as u64);
            let geometry = source.sample_geometry(&mut rng);
            let (rcs_dbsm, floored) = to_dbsm(scatterer.rcs_m2(&geometry));
            (RcsSample { geometry, rcs_dbsm }, floored)
        })
        .collect();
    let floored = drawn.iter().filter(|(_, f)| *f).count();
    RcsDataset {
        samples: drawn.into_iter().map(|(s, _)| s).collect(),
        floored,
    }
}

/// Uniform random unit vector, for tests and diagnostics.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rcs::FacetMesh;
    use crate::scene::{ObjectKind, Scene};

    fn pedestrian_source() -> (FacetMesh, PlacementAngles) {
        let s = Scene::default();
        let mesh = FacetMesh::from_box_dims(0.4, 0.4, 1.8).unwrap();
        let src = PlacementAngles {
            tx: s.tx_position_m,
            rx: s.rx_position_m,
            region: PlacementRegion::for_kind(&s, ObjectKind::Pedestrian),
            wavelength_m: s.wavelength(),
        };
        (mesh, src)
    }

    #[test]
    fn empty_dataset() {
        let (mesh, src) = pedestrian_source();
        let d = generate_rcs_dataset(&mesh, &src, 0, 1);
        assert!(d.samples.is_empty());
        assert_eq!(d.floored, 0);
    }

    #[test]
    fn deterministic_under_seed() {
        let (mesh, src) = pedestrian_source();
        let a = generate_rcs_dataset(&mesh, &src, 500, 42);
        let b = generate_rcs_dataset(&mesh, &src, 500, 42);
        assert_eq!(a, b);
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        assert!(String::from_utf8(ca).unwrap().starts_with("theta_i,phi_i,theta_s,phi_s,rcs_dbsm\n"));
        assert!(a.samples.iter().all(|s| s.rcs_dbsm.is_finite()));
    }

    #[test]
    fn coverage_angles_are_unit_and_downward() {
        let tx = CoverageParams::new(2.5, 2.0, 4.0, 150.0).unwrap();
        let rx = CoverageParams::new(0.5, 2.0, 4.0, 150.0).unwrap();
        let src = CoverageAngles { tx, rx, wavelength_m: 0.005 };
        let mut rng = substream(5, Purpose::Dataset, 0);
        for _ in 0..100 {
            let g = src.sample_geometry(&mut rng);
            assert!((g.incident_direction.norm() - 1.0).abs() < 1e-12);
            assert!(g.incident_direction.z < 0.0 && g.scattered_direction.z > 0.0);
        }
    }
}
