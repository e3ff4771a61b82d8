//! The first Heisenberg group in exponential coordinates `(x, y, t)`.
//!
//! Group law `(x,y,t)*(x',y',t') = (x+x', y+y', t+t'+(x'y-xy'))`, left-invariant
//! frame `X = d/dx + y d/dt`, `Y = d/dy - x d/dt`, `T = d/dt`, contact form
//! `dt - y dx + x dy`. A curve is horizontal iff `t' = y x' - x y'`.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl HPoint {
    pub const IDENTITY: HPoint = HPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    pub fn try_new(x: f64, y: f64, t: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && t.is_finite() {
            Ok(Self { x, y, t })
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn planar(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Horizontal vector `a X + b Y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HVector {
    pub a: f64,
    pub b: f64,
}

impl HVector {
    pub const X: HVector = HVector { a: 1.0, b: 0.0 };
    pub const Y: HVector = HVector { a: 0.0, b: 1.0 };

    pub const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn norm(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// Frame coefficients viewed as a planar vector.
    pub fn as_vec2(&self) -> Vec2 {
        Vec2::new(self.a, self.b)
    }

    pub fn dot(&self, o: &HVector) -> f64 {
        self.a * o.a + self.b * o.b
    }
}

impl From<Vec2> for HVector {
    fn from(v: Vec2) -> Self {
        HVector::new(v.x, v.y)
    }
}

pub fn group_mul(p: HPoint, q: HPoint) -> HPoint {
    HPoint {
        x: p.x + q.x,
        y: p.y + q.y,
        t: p.t + q.t + (q.x * p.y - p.x * q.y),
    }
}

pub fn group_inv(p: HPoint) -> HPoint {
    HPoint::new(-p.x, -p.y, -p.t)
}

/// Anisotropic dilation `(x, y, t) -> (lx, ly, l^2 t)`.
pub fn dilate(lambda: f64, p: HPoint) -> Result<HPoint> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositiveDilation(lambda));
    }
    Ok(HPoint::new(lambda * p.x, lambda * p.y, lambda * lambda * p.t))
}

/// A scalar field on the group with analytic first partials.
pub trait ScalarField {
    fn value(&self, p: HPoint) -> f64;
    /// `[df/dx, df/dy, df/dt]` at `p`.
    fn gradient(&self, p: HPoint) -> [f64; 3];
}

/// A scalar field that also knows its Hessian, so that frame derivatives of it
/// are again [`ScalarField`]s.
pub trait SecondOrderField: ScalarField {
    /// Symmetric matrix of second partials in the order `(x, y, t)`.
    fn hessian(&self, p: HPoint) -> [[f64; 3]; 3];
}

/// Apply the horizontal vector `v = aX + bY` to `f` at `p`.
pub fn frame_apply<F: ScalarField + ?Sized>(v: HVector, f: &F, p: HPoint) -> f64 {
    let [fx, fy, ft] = f.gradient(p);
    v.a * (fx + p.y * ft) + v.b * (fy - p.x * ft)
}

/// The field `p -> (aX + bY) f (p)`; first-order partials come from the
/// Hessian of `f`.
pub struct FrameDerivative<'a, F: ?Sized> {
    pub direction: HVector,
    pub field: &'a F,
}

impl<F: SecondOrderField + ?Sized> ScalarField for FrameDerivative<'_, F> {
    fn value(&self, p: HPoint) -> f64 {
        frame_apply(self.direction, self.field, p)
    }

    fn gradient(&self, p: HPoint) -> [f64; 3] {
        let [_, _, ft] = self.field.gradient(p);
        let h = self.field.hessian(p);
        let (a, b) = (self.direction.a, self.direction.b);
        // d/dx [a(fx + y ft) + b(fy - x ft)] and so on; the x/y coefficients
        // contribute the extra +-ft terms.
        let dx = a * (h[0][0] + p.y * h[2][0]) + b * (h[1][0] - ft - p.x * h[2][0]);
        let dy = a * (h[0][1] + ft + p.y * h[2][1]) + b * (h[1][1] - p.x * h[2][1]);
        let dt = a * (h[0][2] + p.y * h[2][2]) + b * (h[1][2] - p.x * h[2][2]);
        [dx, dy, dt]
    }
}

/// `(XY - YX) f` at `p`, computed from two nested frame derivatives.
pub fn commutator_xy<F: SecondOrderField + ?Sized>(f: &F, p: HPoint) -> f64 {
    let yf = FrameDerivative { direction: HVector::Y, field: f };
    let xf = FrameDerivative { direction: HVector::X, field: f };
    frame_apply(HVector::X, &yf, p) - frame_apply(HVector::Y, &xf, p)
}

/// Horizontal vector field `v1 X + v2 Y` with analytic partials of its
/// coefficients.
pub trait HorizontalField {
    fn coefficients(&self, p: HPoint) -> HVector;
    /// Rows `[dv/dx, dv/dy, dv/dt]` for `v1` and `v2`.
    fn jacobian(&self, p: HPoint) -> [[f64; 3]; 2];
}

/// Divergence `X v1 + Y v2` at a point.
pub fn divergence_at<V: HorizontalField + ?Sized>(field: &V, p: HPoint) -> f64 {
    let [d1, d2] = field.jacobian(p);
    (d1[0] + p.y * d1[2]) + (d2[1] - p.x * d2[2])
}

/// The divergence of `field` as a scalar field on the group.
pub fn horizontal_divergence<V: HorizontalField + ?Sized>(field: &V) -> impl Fn(HPoint) -> f64 + '_ {
    move |p| divergence_at(field, p)
}

/// Polyline in the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarCurve {
    vertices: Vec<Vec2>,
}

impl PlanarCurve {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn start(&self) -> Vec2 {
        self.vertices[0]
    }

    /// Parse `x,y` lines. Blank lines, lines starting with `#` and a leading
    /// `x,y` header are skipped.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut vertices = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            if vertices.is_empty() && record.len() == 2 && &record[0] == "x" && &record[1] == "y" {
                continue;
            }
            if record.len() != 2 {
                return Err(Error::Parse(format!(
                    "record {}: expected `x,y`, got {} fields",
                    line + 1,
                    record.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("record {}: {s:?}: {e}", line + 1)))
            };
            vertices.push(Vec2::new(parse(&record[0])?, parse(&record[1])?));
        }
        Self::new(vertices)
    }

    /// Apply a planar map to every vertex.
    pub fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Self {
        Self { vertices: self.vertices.iter().map(|&v| f(v)).collect() }
    }
}

/// Lift increment of the straight segment `a -> b`: the integral of
/// `y dx - x dy`, which is constant along the segment.
pub fn segment_lift_increment(a: Vec2, b: Vec2) -> f64 {
    b.x * a.y - a.x * b.y
}

/// Horizontal lift of `gamma` starting at height `t0`; one point per vertex.
///
/// For a start away from the origin this is the left translate of the lift of
/// the translated curve, which is what the per-segment increment computes.
pub fn lift_curve(gamma: &PlanarCurve, t0: f64) -> Vec<HPoint> {
    let vs = gamma.vertices();
    let mut out = Vec::with_capacity(vs.len());
    let mut t = t0;
    out.push(HPoint::new(vs[0].x, vs[0].y, t));
    for w in vs.windows(2) {
        t += segment_lift_increment(w[0], w[1]);
        out.push(HPoint::new(w[1].x, w[1].y, t));
    }
    out
}

/// Signed area swept by the segments from the origin to the curve.
pub fn balayage_area(gamma: &PlanarCurve) -> Result<f64> {
    let s = gamma.start();
    if !s.is_zero() {
        return Err(Error::CurveNotAtOrigin(s.x, s.y));
    }
    let mut acc = 0.0;
    for w in gamma.vertices().windows(2) {
        acc += -segment_lift_increment(w[0], w[1]);
    }
    Ok(0.5 * acc)
}
