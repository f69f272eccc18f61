//! Street-canyon geometry, materials and antenna placement.
//!
//! Coordinates: x runs along the street axis, y across it (building walls at
//! `wall_y_positions_m`), z up with the ground plane at z = 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default street-canyon scenario, as shipped in `docs/default-scene.toml`.
pub const DEFAULT_SCENE_TOML: &str = include_str!("../../../docs/default-scene.toml");

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config serialization error: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid scene: {field}: {constraint}")]
    Validation {
        field: &'static str,
        constraint: String,
    },
}

fn invalid(field: &'static str, constraint: impl Into<String>) -> SceneError {
    SceneError::Validation {
        field,
        constraint: constraint.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Pedestrian,
    ParkedCar,
}

impl ObjectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectKind::Pedestrian => "pedestrian",
            ObjectKind::ParkedCar => "parked_car",
        }
    }
}

impl std::str::FromStr for ObjectKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pedestrian" => Ok(ObjectKind::Pedestrian),
            "car" | "parked_car" | "parked-car" => Ok(ObjectKind::ParkedCar),
            other => Err(format!("unknown object kind `{other}`")),
        }
    }
}

/// Bounding dimensions of a box-shaped scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDims {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LamppostSpec {
    pub radius_m: f64,
    pub length_m: f64,
    pub spacing_m: f64,
    pub count: usize,
    /// y coordinates of the lines the posts stand on.
    pub line_offsets_m: Vec<f64>,
}

/// An axis-aligned box standing in the canyon (length along x, width along y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxObject {
    pub kind: ObjectKind,
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub center_position_m: Vec3,
    pub conductor: bool,
}

impl BoxObject {
    pub fn new(kind: ObjectKind, dims: BoxDims, center: Vec3) -> Result<Self, SceneError> {
        let obj = BoxObject {
            kind,
            length_m: dims.length_m,
            width_m: dims.width_m,
            height_m: dims.height_m,
            center_position_m: center,
            conductor: true,
        };
        obj.validate()?;
        Ok(obj)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        for (field, v) in [
            ("length_m", self.length_m),
            ("width_m", self.width_m),
            ("height_m", self.height_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be > 0, got {v}")));
            }
        }
        if self.base_z() < -1e-12 {
            return Err(invalid(
                "center_position_m",
                format!("object base z = {} lies below the ground", self.base_z()),
            ));
        }
        Ok(())
    }

    pub fn base_z(&self) -> f64 {
        self.center_position_m.z - 0.5 * self.height_m
    }
}

/// A vertical perfectly conducting cylinder (lamppost).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub radius_m: f64,
    pub length_m: f64,
    /// Centre of the bottom cap; the axis points along +z.
    pub base_position_m: Vec3,
}

impl Cylinder {
    pub fn new(radius_m: f64, length_m: f64, base_position_m: Vec3) -> Result<Self, SceneError> {
        if !(radius_m > 0.0) {
            return Err(invalid("radius_m", "must be > 0"));
        }
        if !(length_m > 0.0) {
            return Err(invalid("length_m", "must be > 0"));
        }
        Ok(Cylinder {
            radius_m,
            length_m,
            base_position_m,
        })
    }

    pub fn center(&self) -> Vec3 {
        self.base_position_m + Vec3::new(0.0, 0.0, 0.5 * self.length_m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub frequency_hz: f64,
    pub street_length_m: f64,
    pub street_width_m: f64,
    pub sidewalk_width_m: f64,
    pub wall_y_positions_m: [f64; 2],
    pub wall_thickness_m: f64,
    pub wall_rel_permittivity: f64,
    pub ground_rel_permittivity: f64,
    pub tx_position_m: Vec3,
    pub rx_position_m: Vec3,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub lamppost: LamppostSpec,
    pub pedestrian: BoxDims,
    pub parked_car: BoxDims,
}

impl Default for Scene {
    fn default() -> Self {
        load_scene(DEFAULT_SCENE_TOML).expect("bundled default scene is valid")
    }
}

/// Parses and validates a TOML scene document.
pub fn load_scene(config_text: &str) -> Result<Scene, SceneError> {
    let scene: Scene = toml::from_str(config_text)?;
    scene.validate()?;
    Ok(scene)
}

impl Scene {
    pub fn to_toml(&self) -> Result<String, SceneError> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(invalid("frequency_hz", "must be > 0"));
        }
        let lengths = [
            ("street_length_m", self.street_length_m),
            ("street_width_m", self.street_width_m),
            ("sidewalk_width_m", self.sidewalk_width_m),
            ("wall_thickness_m", self.wall_thickness_m),
            ("lamppost.radius_m", self.lamppost.radius_m),
            ("lamppost.length_m", self.lamppost.length_m),
            ("lamppost.spacing_m", self.lamppost.spacing_m),
            ("pedestrian.length_m", self.pedestrian.length_m),
            ("pedestrian.width_m", self.pedestrian.width_m),
            ("pedestrian.height_m", self.pedestrian.height_m),
            ("parked_car.length_m", self.parked_car.length_m),
            ("parked_car.width_m", self.parked_car.width_m),
            ("parked_car.height_m", self.parked_car.height_m),
        ];
        for (field, v) in lengths {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("length must be > 0, got {v}")));
            }
        }
        for (field, v) in [
            ("wall_rel_permittivity", self.wall_rel_permittivity),
            ("ground_rel_permittivity", self.ground_rel_permittivity),
        ] {
            if !(v >= 1.0) {
                return Err(invalid(field, format!("permittivity ≥ 1 required, got {v}")));
            }
        }
        let [y0, y1] = self.wall_y_positions_m;
        if !(y0 < y1) {
            return Err(invalid("wall_y_positions_m", "walls must satisfy y0 < y1"));
        }
        let span = self.street_width_m + 2.0 * self.sidewalk_width_m;
        if (span - (y1 - y0)).abs() > 1e-9 * (1.0 + span) {
            return Err(invalid(
                "wall_y_positions_m",
                format!(
                    "street plus two sidewalks ({span} m) must span wall to wall ({} m)",
                    y1 - y0
                ),
            ));
        }
        for (field, p) in [("tx_position_m", self.tx_position_m), ("rx_position_m", self.rx_position_m)] {
            if !(p.y > y0 && p.y < y1) {
                return Err(invalid(field, "antenna must lie strictly between the walls"));
            }
            if !(p.z > 0.0) {
                return Err(invalid(field, "antenna must be above the ground"));
            }
        }
        if self.lamppost.line_offsets_m.is_empty() {
            return Err(invalid("lamppost.line_offsets_m", "at least one post line"));
        }
        Ok(())
    }

    /// Carrier wavelength c0 / f0 in metres.
    pub fn wavelength(&self) -> f64 {
        wavelength(self.frequency_hz)
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.street_length_m
    }

    pub fn box_dims(&self, kind: ObjectKind) -> BoxDims {
        match kind {
            ObjectKind::Pedestrian => self.pedestrian,
            ObjectKind::ParkedCar => self.parked_car,
        }
    }

    /// True when `p` lies inside the canyon volume (between the walls, above
    /// ground, within the street length).
    pub fn contains(&self, p: Vec3) -> bool {
        let [y0, y1] = self.wall_y_positions_m;
        p.y > y0 && p.y < y1 && p.z >= 0.0 && p.x.abs() <= self.half_length()
    }

    /// Lamppost cylinders, staggered across the post lines.
    ///
    /// Consecutive posts alternate lines and advance by `spacing / lines` in
    /// x, so every line carries posts exactly `spacing` apart. The whole
    /// pattern is centred on x = 0.
    pub fn lampposts(&self) -> Vec<Cylinder> {
        let spec = &self.lamppost;
        let lines = spec.line_offsets_m.len();
        let step = spec.spacing_m / lines as f64;
        let extent = step * spec.count.saturating_sub(1) as f64;
        let x0 = -0.5 * extent;
        (0..spec.count)
            .map(|i| {
                let y = spec.line_offsets_m[i % lines];
                Cylinder {
                    radius_m: spec.radius_m,
                    length_m: spec.length_m,
                    base_position_m: Vec3::new(x0 + step * i as f64, y, 0.0),
                }
            })
            .collect()
    }
}

pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}
