//! Multipath channel of the canyon: LOS, first-order specular reflections
//! (two walls and the ground, by the image method) and single scattering
//! from objects.
//!
//! Each path contributes `a · exp(j ω τ)`:
//!
//! * LOS: `|a0| = λ / (4π r0)`;
//! * reflection: `|a| = |R| λ / (4π (r1 + r2))`;
//! * scatter: `|a|² = σ λ² / ((4π)³ r1² r2²)`.
//!
//! Scattering uses the exact bistatic σ of the object geometry in
//! deterministic mode, or a σ drawn from a logistic law in dBsm in
//! quasi-deterministic mode.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::em::{self, spreading_phasor, Polarization};
use crate::geometry::Vec3;
use crate::rcs::{cylinder_rcs, mesh_rcs, to_dbsm, BistaticGeometry, FacetMesh};
use crate::scene::{BoxObject, Cylinder, Scene, SPEED_OF_LIGHT};

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("TX and RX coincide")]
    CoincidentAntennas,
    #[error("scatterer {0} coincides with an antenna")]
    CoincidentScatterer(usize),
    #[error("scatterer {0} lies outside the canyon")]
    OutsideCanyon(usize),
    #[error("logistic scale must be positive, got {0}")]
    LogisticScale(f64),
    #[error("channel needs at least one path")]
    EmptyChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Los,
    WallReflection,
    GroundReflection,
    Scatter,
}

impl PathKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Los => "los",
            PathKind::WallReflection => "wall_reflection",
            PathKind::GroundReflection => "ground_reflection",
            PathKind::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathGeometry {
    Direct { r0: f64 },
    Specular { r1: f64, r2: f64, point: Vec3 },
    Scattered { r1: f64, r2: f64, object_id: usize },
}

impl PathGeometry {
    /// `(r1, r2)`; for the direct path `r1 = r0` and `r2 = 0`.
    pub fn legs(&self) -> (f64, f64) {
        match *self {
            PathGeometry::Direct { r0 } => (r0, 0.0),
            PathGeometry::Specular { r1, r2, .. } | PathGeometry::Scattered { r1, r2, .. } => (r1, r2),
        }
    }

    pub fn length(&self) -> f64 {
        let (a, b) = self.legs();
        a + b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationPath {
    pub kind: PathKind,
    pub amplitude: Complex64,
    pub delay_s: f64,
    pub path_loss_db: f64,
    pub excess_delay_s: f64,
    pub geometry: PathGeometry,
    /// σ used for a scatter path, dBsm.
    pub sigma_dbsm: Option<f64>,
}

impl PropagationPath {
    fn new(
        kind: PathKind,
        amplitude: Complex64,
        geometry: PathGeometry,
        los_delay_s: f64,
        sigma_dbsm: Option<f64>,
    ) -> Self {
        let delay_s = geometry.length() / SPEED_OF_LIGHT;
        PropagationPath {
            kind,
            amplitude,
            delay_s,
            path_loss_db: em::path_loss_db(amplitude),
            excess_delay_s: (delay_s - los_delay_s).max(0.0),
            geometry,
            sigma_dbsm,
        }
    }

    pub fn power(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// Logistic law of σ in dBsm: location μ, scale s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticRcs {
    pub mu_dbsm: f64,
    pub scale_db: f64,
}

impl LogisticRcs {
    pub fn new(mu_dbsm: f64, scale_db: f64) -> Result<Self, TraceError> {
        if !(scale_db > 0.0 && scale_db.is_finite()) {
            return Err(TraceError::LogisticScale(scale_db));
        }
        Ok(LogisticRcs { mu_dbsm, scale_db })
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        };
        self.mu_dbsm + self.scale_db * (u / (1.0 - u)).ln()
    }
}

/// Where a scatter path gets its σ from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RcsSource {
    /// Exact bistatic σ of the object geometry.
    Deterministic,
    /// σ in dBsm drawn from a fitted distribution.
    Quasi(LogisticRcs),
}

/// A scatterer placed in the scene.
pub trait SceneObject {
    /// Phase and distance reference.
    fn reference_point(&self) -> Vec3;
    fn exact_rcs_m2(&self, g: &BistaticGeometry) -> f64;
}

impl SceneObject for BoxObject {
    fn reference_point(&self) -> Vec3 {
        self.center_position_m
    }

    fn exact_rcs_m2(&self, g: &BistaticGeometry) -> f64 {
        let mesh = FacetMesh::from_box(self).expect("validated box has positive dimensions");
        mesh_rcs(&mesh, g).expect("box mesh is non-empty")
    }
}

impl SceneObject for Cylinder {
    fn reference_point(&self) -> Vec3 {
        self.center()
    }

    fn exact_rcs_m2(&self, g: &BistaticGeometry) -> f64 {
        cylinder_rcs(self, g)
    }
}

fn gain_factor(scene: &Scene) -> f64 {
    10f64.powf((scene.tx_gain_dbi + scene.rx_gain_dbi) / 20.0)
}

pub fn los_delay(scene: &Scene) -> f64 {
    scene.tx_position_m.distance(scene.rx_position_m) / SPEED_OF_LIGHT
}

pub fn trace_los(scene: &Scene) -> Result<PropagationPath, TraceError> {
    let r0 = scene.tx_position_m.distance(scene.rx_position_m);
    let a0 = em::friis_los_amplitude(r0, scene.wavelength()).map_err(|_| TraceError::CoincidentAntennas)?;
    Ok(PropagationPath::new(
        PathKind::Los,
        a0 * gain_factor(scene),
        PathGeometry::Direct { r0 },
        r0 / SPEED_OF_LIGHT,
        None,
    ))
}

/// Planar reflector `axis · r = offset`.
#[derive(Debug, Clone, Copy)]
struct Mirror {
    kind: PathKind,
    normal: Vec3,
    offset: f64,
}

impl Mirror {
    fn image(&self, p: Vec3) -> Vec3 {
        p - self.normal * (2.0 * (self.normal.dot(p) - self.offset))
    }
}

/// Specular point, `(r1, r2)` and incidence angle for a bounce of TX→RX.
fn specular(mirror: &Mirror, tx: Vec3, rx: Vec3) -> Option<(Vec3, f64, f64, f64)> {
    let img = mirror.image(tx);
    let d = rx - img;
    let denom = mirror.normal.dot(d);
    if denom == 0.0 {
        return None;
    }
    let t = (mirror.offset - mirror.normal.dot(img)) / denom;
    if !(0.0..=1.0).contains(&t) {
        return None;
    }
    let point = img + d * t;
    let total = d.norm();
    let theta = (denom.abs() / total).clamp(0.0, 1.0).acos();
    Some((point, tx.distance(point), point.distance(rx), theta))
}

/// First-order reflections: wall at `y0`, wall at `y1`, ground.
pub fn trace_reflections(scene: &Scene) -> Vec<PropagationPath> {
    let lambda = scene.wavelength();
    let los = los_delay(scene);
    let g = gain_factor(scene);
    let [y0, y1] = scene.wall_y_positions_m;
    let mirrors = [
        Mirror { kind: PathKind::WallReflection, normal: Vec3::Y, offset: y0 },
        Mirror { kind: PathKind::WallReflection, normal: Vec3::Y, offset: y1 },
        Mirror { kind: PathKind::GroundReflection, normal: Vec3::Z, offset: 0.0 },
    ];
    mirrors
        .iter()
        .filter_map(|m| {
            let (point, r1, r2, theta) = specular(m, scene.tx_position_m, scene.rx_position_m)?;
            // walls and ground end with the street; walls have no top
            if point.x.abs() > scene.half_length() {
                return None;
            }
            let coeff = match m.kind {
                PathKind::GroundReflection => {
                    em::fresnel_half_space(scene.ground_rel_permittivity, theta, Polarization::Tm)
                }
                _ => em::fresnel_slab(
                    scene.wall_rel_permittivity,
                    scene.wall_thickness_m,
                    lambda,
                    theta,
                    Polarization::Te,
                ),
            };
            let amp = reflected_amplitude(coeff, r1 + r2, lambda) * g;
            Some(PropagationPath::new(
                m.kind,
                amp,
                PathGeometry::Specular { r1, r2, point },
                los,
                None,
            ))
        })
        .collect()
}

/// `R λ / (4π (r1 + r2)) · exp(j k (r1 + r2))`.
pub fn reflected_amplitude(coeff: Complex64, length: f64, wavelength_m: f64) -> Complex64 {
    coeff * spreading_phasor(length, wavelength_m) * (wavelength_m / (4.0 * PI * length))
}

/// `−10 log10(σ λ² / ((4π)³ r1² r2²))`.
pub fn scatter_path_loss_db(r1: f64, r2: f64, sigma_m2: f64, wavelength_m: f64) -> f64 {
    let four_pi_cubed = (4.0 * PI).powi(3);
    -10.0 * (sigma_m2 * wavelength_m * wavelength_m / (four_pi_cubed * r1 * r1 * r2 * r2)).log10()
}

/// Single-scatter path via `object`.
pub fn trace_scatter<O, R>(
    scene: &Scene,
    object: &O,
    object_id: usize,
    source: &RcsSource,
    rng: &mut R,
) -> Result<PropagationPath, TraceError>
where
    O: SceneObject + ?Sized,
    R: Rng + ?Sized,
{
    let p = object.reference_point();
    if !scene.contains(p) {
        return Err(TraceError::OutsideCanyon(object_id));
    }
    let (tx, rx) = (scene.tx_position_m, scene.rx_position_m);
    let (r1, r2) = (tx.distance(p), p.distance(rx));
    if r1 == 0.0 || r2 == 0.0 {
        return Err(TraceError::CoincidentScatterer(object_id));
    }
    let lambda = scene.wavelength();
    let sigma_dbsm = match source {
        RcsSource::Deterministic => {
            let g = BistaticGeometry::from_positions(tx, p, rx, lambda)
                .map_err(|_| TraceError::CoincidentScatterer(object_id))?;
            to_dbsm(object.exact_rcs_m2(&g)).0
        }
        RcsSource::Quasi(law) => law.sample(rng),
    };
    let sigma = 10f64.powf(sigma_dbsm / 10.0);
    let magnitude = sigma.sqrt() * lambda / ((4.0 * PI).powf(1.5) * r1 * r2) * gain_factor(scene);
    Ok(PropagationPath::new(
        PathKind::Scatter,
        spreading_phasor(r1 + r2, lambda) * magnitude,
        PathGeometry::Scattered { r1, r2, object_id },
        los_delay(scene),
        Some(sigma_dbsm),
    ))
}

/// Per-path table plus non-coherent power totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub paths: Vec<PropagationPath>,
    pub total_power: f64,
    /// `−10 log10 Σ |a|²` over all paths.
    pub combined_path_loss_db: f64,
    pub scatter_power: f64,
    /// `−10 log10 Σ |a_s|²` over scatter paths, if any.
    pub scatter_path_loss_db: Option<f64>,
}

pub fn assemble_channel(paths: Vec<PropagationPath>) -> Result<ChannelSummary, TraceError> {
    if paths.is_empty() {
        return Err(TraceError::EmptyChannel);
    }
    let total_power: f64 = paths.iter().map(PropagationPath::power).sum();
    let scatter_power: f64 = paths
        .iter()
        .filter(|p| p.kind == PathKind::Scatter)
        .map(PropagationPath::power)
        .sum();
    let has_scatter = paths.iter().any(|p| p.kind == PathKind::Scatter);
    Ok(ChannelSummary {
        total_power,
        combined_path_loss_db: -10.0 * total_power.log10(),
        scatter_power,
        scatter_path_loss_db: has_scatter.then(|| -10.0 * scatter_power.log10()),
        paths,
    })
}

/// Full channel: LOS, reflections, the given boxes and optionally the
/// lampposts (numbered after the boxes).
pub fn trace_channel<R: Rng + ?Sized>(
    scene: &Scene,
    objects: &[BoxObject],
    include_lampposts: bool,
    source: &RcsSource,
    rng: &mut R,
) -> Result<ChannelSummary, TraceError> {
    let mut paths = vec![trace_los(scene)?];
    paths.extend(trace_reflections(scene));
    for (i, obj) in objects.iter().enumerate() {
        paths.push(trace_scatter(scene, obj, i, source, rng)?);
    }
    if include_lampposts {
        // lampposts are regular shapes: always the closed form
        for (i, post) in scene.lampposts().iter().enumerate() {
            paths.push(trace_scatter(scene, post, objects.len() + i, &RcsSource::Deterministic, rng)?);
        }
    }
    assemble_channel(paths)
}

pub const PATH_CSV_HEADER: [&str; 7] = [
    "kind",
    "r1",
    "r2",
    "delay_ns",
    "excess_delay_ns",
    "path_loss_db",
    "sigma_dbsm",
];

pub fn write_path_table<W: Write>(paths: &[PropagationPath], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PATH_CSV_HEADER)?;
    for p in paths {
        let (r1, r2) = p.geometry.legs();
        w.write_record([
            p.kind.as_str().to_string(),
            r1.to_string(),
            r2.to_string(),
            (p.delay_s * 1e9).to_string(),
            (p.excess_delay_s * 1e9).to_string(),
            p.path_loss_db.to_string(),
            p.sigma_dbsm.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
