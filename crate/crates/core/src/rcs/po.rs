//! Physical Optics scattering from flat perfectly conducting facets.
//!
//! For a facet with outward normal `n`, scattering vector `q = k(ŝ − î)` and
//! in-plane projection `w = q − (q·n) n`, the PO surface integral
//! `I = ∫ exp(j q·r) dS` is turned into a sum over the edges by the
//! divergence theorem:
//!
//! ```text
//! I = (−j / |w|²) Σ_m  q·(a_m × n) · exp(j q·c_m) · sinc(q·a_m / 2)
//! ```
//!
//! with `a_m` the edge vector and `c_m` the edge midpoint. The sum becomes
//! singular as `w → 0` (the specular direction); there the integral is
//! evaluated from the facet area and second moment instead, which is exact
//! to third order in `|w|`.
//!
//! The scalar amplitude of a facet is `F · I / λ` with obliquity
//! `F = (n·ŝ − n·î) / 2`, so that `σ = 4π |Σ amplitudes|²` gives
//! `4π A² / λ²` for a plate at broadside.

use num_complex::Complex64;

use crate::geometry::{Rotation, Vec3};
use crate::scene::{BoxObject, Cylinder};

use super::cylinder::sinc;
use super::{BistaticGeometry, RcsError, Scatterer};

/// Below this value of `|w| · R` (R the facet radius about its centroid)
/// the moment expansion replaces the edge sum.
const SPECULAR_SWITCH: f64 = 1e-3;

/// A planar facet with vertices ordered counter-clockwise about its normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec3>,
    normal: Vec3,
    area: f64,
    centroid: Vec3,
    radius: f64,
}

impl Polygon {
    /// Builds a facet; the normal follows the right-hand rule on the loop.
    pub fn new(vertices: Vec<Vec3>) -> Result<Self, RcsError> {
        if vertices.len() < 3 {
            return Err(RcsError::TooFewVertices(vertices.len()));
        }
        // Newell's method
        let mut nsum = Vec3::default();
        for (i, a) in vertices.iter().enumerate() {
            let b = vertices[(i + 1) % vertices.len()];
            nsum = nsum + a.cross(b);
        }
        let twice_area = nsum.norm();
        let v0 = vertices[0];
        let mut diameter: f64 = 0.0;
        for a in &vertices {
            for b in &vertices {
                diameter = diameter.max(a.distance(*b));
            }
        }
        if twice_area <= 1e-15 * diameter * diameter {
            return Ok(Polygon {
                vertices,
                normal: Vec3::Z,
                area: 0.0,
                centroid: v0,
                radius: 0.0,
            });
        }
        let normal = nsum * (1.0 / twice_area);
        let dev = vertices
            .iter()
            .map(|v| (*v - v0).dot(normal).abs())
            .fold(0.0, f64::max);
        if dev > 1e-9 * diameter {
            return Err(RcsError::NonPlanar(dev));
        }
        // area centroid from a fan about v0
        let mut csum = Vec3::default();
        let mut asum = 0.0;
        for i in 1..vertices.len() - 1 {
            let (a, b) = (vertices[i], vertices[i + 1]);
            let t = 0.5 * (a - v0).cross(b - v0).dot(normal);
            csum = csum + (v0 + a + b) * (t / 3.0);
            asum += t;
        }
        let centroid = csum * (1.0 / asum);
        let radius = vertices.iter().map(|v| v.distance(centroid)).fold(0.0, f64::max);
        Ok(Polygon {
            vertices,
            normal,
            area: asum,
            centroid,
            radius,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn centroid(&self) -> Vec3 {
        self.centroid
    }

    fn edges(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// `wᵀ M w` with `M` the second area moment about the centroid.
    fn second_moment(&self, w: Vec3) -> f64 {
        let c = self.centroid;
        self.edges()
            .map(|(a, b)| {
                let (p1, p2) = (a - c, b - c);
                let t = 0.5 * p1.cross(p2).dot(self.normal);
                let (u1, u2) = (w.dot(p1), w.dot(p2));
                t / 12.0 * (u1 * u1 + u2 * u2 + (u1 + u2) * (u1 + u2))
            })
            .sum()
    }

    /// `∫ exp(j q·r) dS` over the facet.
    pub fn phase_integral(&self, q: Vec3) -> Complex64 {
        if self.area == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.normal;
        let w = q - n * q.dot(n);
        let w2 = w.dot(w);
        if w2.sqrt() * self.radius < SPECULAR_SWITCH {
            let base = Complex64::from_polar(1.0, q.dot(self.centroid));
            return base * (self.area - 0.5 * self.second_moment(w));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.edges() {
            let edge = b - a;
            let mid = (a + b) * 0.5;
            let weight = q.dot(edge.cross(n)) * sinc(0.5 * q.dot(edge));
            acc += Complex64::from_polar(weight, q.dot(mid));
        }
        acc * Complex64::new(0.0, -1.0 / w2)
    }

    pub fn transformed(&self, rot: &Rotation, shift: Vec3) -> Polygon {
        Polygon::new(self.vertices.iter().map(|v| rot.apply(*v) + shift).collect())
            .expect("rigid motion keeps a valid polygon valid")
    }
}

/// Scattering amplitude of one facet (units of length; `σ = 4π|·|²`).
///
/// Facets that are not both lit by the incident wave and facing the
/// receiver contribute nothing.
pub fn po_polygon_field(poly: &Polygon, g: &BistaticGeometry) -> Complex64 {
    let n = poly.normal();
    let lit = -n.dot(g.incident_direction);
    let seen = n.dot(g.scattered_direction);
    if poly.area() == 0.0 || lit <= 0.0 || seen <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let obliquity = 0.5 * (seen + lit);
    poly.phase_integral(g.scattering_vector()) * (obliquity / g.wavelength_m)
}

/// Closed collection of outward-oriented facets in a local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetMesh {
    polygons: Vec<Polygon>,
}

impl FacetMesh {
    pub fn new(polygons: Vec<Polygon>) -> Result<Self, RcsError> {
        if polygons.is_empty() {
            return Err(RcsError::EmptyMesh);
        }
        Ok(FacetMesh { polygons })
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    /// Axis-aligned box centred at the origin (length along x, width along
    /// y, height along z). The bottom face rests on the ground and is left
    /// out.
    pub fn from_box_dims(length: f64, width: f64, height: f64) -> Result<Self, RcsError> {
        let (hx, hy, hz) = (0.5 * length, 0.5 * width, 0.5 * height);
        let p = |x: f64, y: f64, z: f64| Vec3::new(x * hx, y * hy, z * hz);
        let faces = vec![
            // +z
            vec![p(-1., -1., 1.), p(1., -1., 1.), p(1., 1., 1.), p(-1., 1., 1.)],
            // +x
            vec![p(1., -1., -1.), p(1., 1., -1.), p(1., 1., 1.), p(1., -1., 1.)],
            // -x
            vec![p(-1., 1., -1.), p(-1., -1., -1.), p(-1., -1., 1.), p(-1., 1., 1.)],
            // +y
            vec![p(1., 1., -1.), p(-1., 1., -1.), p(-1., 1., 1.), p(1., 1., 1.)],
            // -y
            vec![p(-1., -1., -1.), p(1., -1., -1.), p(1., -1., 1.), p(-1., -1., 1.)],
        ];
        FacetMesh::new(faces.into_iter().map(Polygon::new).collect::<Result<_, _>>()?)
    }

    pub fn from_box(obj: &BoxObject) -> Result<Self, RcsError> {
        Self::from_box_dims(obj.length_m, obj.width_m, obj.height_m)
    }

    /// Faceted cylinder (side panels plus top cap) centred at the origin.
    pub fn from_cylinder(cyl: &Cylinder, segments: usize) -> Result<Self, RcsError> {
        let segments = segments.max(3);
        let hz = 0.5 * cyl.length_m;
        let ring: Vec<(f64, f64)> = (0..segments)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / segments as f64;
                (cyl.radius_m * a.cos(), cyl.radius_m * a.sin())
            })
            .collect();
        let mut polys = Vec::with_capacity(segments + 1);
        for i in 0..segments {
            let (x0, y0) = ring[i];
            let (x1, y1) = ring[(i + 1) % segments];
            polys.push(Polygon::new(vec![
                Vec3::new(x0, y0, -hz),
                Vec3::new(x1, y1, -hz),
                Vec3::new(x1, y1, hz),
                Vec3::new(x0, y0, hz),
            ])?);
        }
        polys.push(Polygon::new(ring.iter().map(|&(x, y)| Vec3::new(x, y, hz)).collect())?);
        FacetMesh::new(polys)
    }

    pub fn transformed(&self, rot: &Rotation, shift: Vec3) -> FacetMesh {
        FacetMesh {
            polygons: self.polygons.iter().map(|p| p.transformed(rot, shift)).collect(),
        }
    }
}

/// Coherent PO sum over the facets; `σ = 4π |Σ field|²` in m².
pub fn mesh_rcs(mesh: &FacetMesh, g: &BistaticGeometry) -> Result<f64, RcsError> {
    if mesh.polygons.is_empty() {
        return Err(RcsError::EmptyMesh);
    }
    let total: Complex64 = mesh.polygons.iter().map(|p| po_polygon_field(p, g)).sum();
    Ok(4.0 * std::f64::consts::PI * total.norm_sqr())
}

impl Scatterer for FacetMesh {
    fn rcs_m2(&self, g: &BistaticGeometry) -> f64 {
        mesh_rcs(self, g).expect("FacetMesh is non-empty by construction")
    }
}
