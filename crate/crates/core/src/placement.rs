//! Random object placement over the canyon lanes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::scene::{ObjectKind, Scene};

/// Cross-street extent of one placement lane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lane {
    /// Uniform in `lo < y < hi`.
    Band { lo: f64, hi: f64 },
    /// Fixed `y`.
    Line { y: f64 },
}

impl Lane {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Lane::Band { lo, hi } => rng.random_range(lo..hi),
            Lane::Line { y } => y,
        }
    }

    fn is_empty(&self) -> bool {
        matches!(*self, Lane::Band { lo, hi } if !(hi > lo))
    }
}

/// x uniform over `x_range`, lane picked with equal probability, fixed z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRegion {
    pub x_range: (f64, f64),
    pub lanes: Vec<Lane>,
    pub z_m: f64,
}

impl PlacementRegion {
    /// Placement ranges of the Monte-Carlo experiment: pedestrians on the
    /// two sidewalks, parked cars on the lanes next to them, z = 1 m.
    pub fn for_kind(scene: &Scene, kind: ObjectKind) -> Self {
        let half = scene.half_length();
        let [y0, y1] = scene.wall_y_positions_m;
        let w = scene.sidewalk_width_m;
        let lanes = match kind {
            ObjectKind::Pedestrian => vec![
                Lane::Band { lo: y0, hi: y0 + w },
                Lane::Band { lo: y1 - w, hi: y1 },
            ],
            ObjectKind::ParkedCar => vec![Lane::Line { y: y0 + w + 1.0 }, Lane::Line { y: y1 - w - 1.0 }],
        };
        PlacementRegion {
            x_range: (-half, half),
            lanes,
            z_m: 1.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lanes.is_empty() || !(self.x_range.1 > self.x_range.0) || self.lanes.iter().any(Lane::is_empty)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let x = rng.random_range(self.x_range.0..self.x_range.1);
        let lane = &self.lanes[rng.random_range(0..self.lanes.len())];
        Vec3::new(x, lane.sample(rng), self.z_m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    #[test]
    fn table_ranges() {
        let s = Scene::default();
        let ped = PlacementRegion::for_kind(&s, ObjectKind::Pedestrian);
        assert_eq!(ped.lanes, vec![Lane::Band { lo: 0.0, hi: 2.0 }, Lane::Band { lo: 14.0, hi: 16.0 }]);
        let car = PlacementRegion::for_kind(&s, ObjectKind::ParkedCar);
        assert_eq!(car.lanes, vec![Lane::Line { y: 3.0 }, Lane::Line { y: 13.0 }]);
        assert_eq!(car.x_range, (-75.0, 75.0));
        let mut rng = substream(3, Purpose::Placement, 0);
        let mut near = 0;
        for _ in 0..2000 {
            let p = ped.sample(&mut rng);
            assert!(p.x > -75.0 && p.x < 75.0 && p.z == 1.0);
            assert!((0.0..2.0).contains(&p.y) || (14.0..16.0).contains(&p.y));
            near += usize::from(p.y < 8.0);
        }
        assert!((800..1200).contains(&near));
    }

    #[test]
    fn empty_region() {
        let r = PlacementRegion {
            x_range: (0.0, 0.0),
            lanes: vec![Lane::Line { y: 1.0 }],
            z_m: 1.0,
        };
        assert!(r.is_empty());
    }
}
