//! Triangle meshes of `C(I)` and line data for plotting the ruling
//! arrangement and the calibration.

use std::f64::consts::TAU;
use std::io::Write;

use serde::Serialize;

use crate::arcs::ANGLE_TOL;
use crate::calibrate::CalibrationField;
use crate::cone::ConeSurface;
use crate::error::{Error, Result};
use crate::geom::{normalize_angle, Rotation, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeshSpec {
    pub radius: f64,
    pub angular_res: usize,
    pub radial_res: usize,
}

impl MeshSpec {
    pub const MIN_RESOLUTION: usize = 8;

    pub fn new(radius: f64, angular_res: usize, radial_res: usize) -> Result<Self> {
        if angular_res < Self::MIN_RESOLUTION || radial_res < Self::MIN_RESOLUTION {
            return Err(Error::BadMeshSpec(format!(
                "resolutions {angular_res}x{radial_res} must both be at least {}",
                Self::MIN_RESOLUTION
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::BadMeshSpec(format!("radius {radius} must be positive")));
        }
        Ok(Self { radius, angular_res, radial_res })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    /// 0-indexed vertex triples, counterclockwise seen from above.
    pub faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Wavefront-style text: `v x y z` lines, then 1-indexed `f i j k` lines.
    pub fn write_obj<W: Write>(&self, mut w: W) -> Result<()> {
        for [x, y, z] in &self.vertices {
            writeln!(w, "v {x} {y} {z}")?;
        }
        for [a, b, c] in &self.faces {
            writeln!(w, "f {} {} {}", a + 1, b + 1, c + 1)?;
        }
        Ok(())
    }

    /// Number of faces sharing each undirected edge.
    pub fn edge_counts(&self) -> std::collections::HashMap<(usize, usize), usize> {
        let mut counts = std::collections::HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// Spoke angles: `angular_res` uniform directions plus every crease ray
/// that is not already one of them.
pub fn mesh_angles(cone: &ConeSurface, angular_res: usize) -> (Vec<f64>, usize) {
    let mut angles: Vec<f64> = (0..angular_res).map(|k| TAU * k as f64 / angular_res as f64).collect();
    let mut extra = 0;
    for a in cone.crease_angles() {
        let a = normalize_angle(a);
        let dup = angles.iter().any(|&b| {
            let d = (a - b).abs();
            d < ANGLE_TOL || TAU - d < ANGLE_TOL
        });
        if !dup {
            angles.push(a);
            extra += 1;
        }
    }
    angles.sort_by(f64::total_cmp);
    (angles, extra)
}

/// Polar-grid triangulation of the graph `(x, y, u(x, y))` over the disk of
/// radius `spec.radius`: an apex, `radial_res` rings, and spokes on every
/// crease ray. Vertex count is `(angular_res + extra) * radial_res + 1`.
pub fn export_mesh(cone: &ConeSurface, spec: &MeshSpec) -> Result<TriangleMesh> {
    if !cone.family().is_finite() {
        return Err(Error::InfiniteFamily);
    }
    let (angles, _) = mesh_angles(cone, spec.angular_res);
    let m = angles.len();
    let mut vertices = Vec::with_capacity(m * spec.radial_res + 1);
    vertices.push([0.0, 0.0, 0.0]);
    for i in 1..=spec.radial_res {
        let r = spec.radius * i as f64 / spec.radial_res as f64;
        for &a in &angles {
            let v = Vec2::from_polar(r, a);
            vertices.push([v.x, v.y, cone.evaluate(v)]);
        }
    }
    let idx = |ring: usize, j: usize| 1 + (ring - 1) * m + (j % m);
    let mut faces = Vec::with_capacity(m * (2 * spec.radial_res - 1));
    for j in 0..m {
        faces.push([0, idx(1, j), idx(1, j + 1)]);
    }
    for ring in 1..spec.radial_res {
        for j in 0..m {
            let (a, b) = (idx(ring, j), idx(ring, j + 1));
            let (c, d) = (idx(ring + 1, j + 1), idx(ring + 1, j));
            faces.push([a, d, c]);
            faces.push([a, c, b]);
        }
    }
    Ok(TriangleMesh { vertices, faces })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// Ruling through the origin over a gap sector.
    Radial,
    /// Ruling in the counterclockwise half of an arc's sector.
    CharacteristicUpper,
    CharacteristicLower,
    Bisectrix,
    /// Arc endpoint ray.
    Boundary,
    /// Calibration arrow.
    Field,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Arc index for arc-related kinds, gap index for `radial`.
    pub index: Option<usize>,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Segment {
    fn new(kind: SegmentKind, index: Option<usize>, a: Vec2, b: Vec2) -> Self {
        Self { kind, index, x0: a.x, y0: a.y, x1: b.x, y1: b.y }
    }

    pub fn start(&self) -> Vec2 {
        Vec2::new(self.x0, self.y0)
    }

    pub fn end(&self) -> Vec2 {
        Vec2::new(self.x1, self.y1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FigureSpec {
    pub radius: f64,
    /// Radial rulings per full turn of gap angle.
    pub rays_per_turn: usize,
    /// Rulings in each half of an arc's sector.
    pub lines_per_half: usize,
    /// Arrow grid `n x n` over the bounding square, when set.
    pub field_grid: Option<usize>,
}

impl Default for FigureSpec {
    fn default() -> Self {
        Self { radius: 1.0, rays_per_turn: 48, lines_per_half: 8, field_grid: None }
    }
}

/// Segments of the ruling arrangement, grouped by kind.
pub fn export_figure_data(cone: &ConeSurface, spec: &FigureSpec) -> Result<Vec<Segment>> {
    let family = cone.family();
    if !family.is_finite() {
        return Err(Error::InfiniteFamily);
    }
    let r = spec.radius;
    let mut out = Vec::new();
    let ray = |theta: f64| Vec2::from_polar(r, theta);

    if family.is_empty() {
        for k in 0..spec.rays_per_turn {
            out.push(Segment::new(SegmentKind::Radial, Some(0), Vec2::ZERO, ray(TAU * k as f64 / spec.rays_per_turn as f64)));
        }
    }
    for (j, g) in family.complementary().iter().enumerate() {
        let count = ((g.length / TAU) * spec.rays_per_turn as f64).ceil().max(1.0) as usize;
        for k in 0..count {
            let theta = g.start + g.length * (k as f64 + 0.5) / count as f64;
            out.push(Segment::new(SegmentKind::Radial, Some(j), Vec2::ZERO, ray(theta)));
        }
    }
    for (i, a) in family.arcs().iter().enumerate() {
        out.push(Segment::new(SegmentKind::Bisectrix, Some(i), Vec2::ZERO, ray(a.center())));
    }
    for (i, a) in family.arcs().iter().enumerate() {
        out.push(Segment::new(SegmentKind::Boundary, Some(i), Vec2::ZERO, ray(a.lower_end())));
        out.push(Segment::new(SegmentKind::Boundary, Some(i), Vec2::ZERO, ray(a.upper_end())));
    }
    for (kind, sign) in [(SegmentKind::CharacteristicUpper, 1.0), (SegmentKind::CharacteristicLower, -1.0)] {
        for (i, a) in family.arcs().iter().enumerate() {
            let rot = Rotation::new(a.center());
            let alpha = a.half_angle();
            let dir = Vec2::new(alpha.cos(), sign * alpha.sin());
            for k in 1..=spec.lines_per_half {
                // foot on the bisectrix, ruling parallel to the boundary ray
                let f = r * k as f64 / (spec.lines_per_half + 1) as f64;
                let s = -f * alpha.cos() + (r * r - f * f * alpha.sin().powi(2)).sqrt();
                let foot = Vec2::new(f, 0.0);
                out.push(Segment::new(kind, Some(i), rot.apply(foot), rot.apply(foot + dir * s)));
            }
        }
    }
    if let Some(n) = spec.field_grid {
        let field = CalibrationField::build(cone)?;
        let h = 2.0 * r / n as f64;
        for a in 0..n {
            for b in 0..n {
                let p = Vec2::new(-r + (a as f64 + 0.5) * h, -r + (b as f64 + 0.5) * h);
                if p.norm() > r {
                    continue;
                }
                let v = field.at(p).as_vec2();
                out.push(Segment::new(SegmentKind::Field, None, p, p + v * (0.4 * h)));
            }
        }
    }
    Ok(out)
}

/// CSV with header `kind,index,x0,y0,x1,y1`.
pub fn write_segments_csv<W: Write>(segments: &[Segment], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for s in segments {
        wr.serialize(s)?;
    }
    wr.flush()?;
    Ok(())
}
