//! The cone `C(I)` as the t-graph of `u_I`.
//!
//! Over the sector of an arc with half-angle `alpha`, in coordinates rotated
//! so that the bisectrix is the positive x-axis, `u = y (|y| cot(alpha) - x)`;
//! `u` vanishes on every gap sector. At most one arc contributes at any point,
//! so evaluation locates the point and applies a single closed form.

mod regularity;

pub use regularity::*;

use serde::Serialize;

use crate::arcs::{Arc, ArcFamily, SectorLocation, Side, ANGLE_TOL};
use crate::error::{Error, Result};
use crate::geom::{Rotation, Vec2};

/// A quantity that is single-valued off the interface rays and has two
/// one-sided limits on them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sided<T> {
    One { value: T },
    Two { ray: RayKind, ccw: T, cw: T },
}

impl<T: Copy> Sided<T> {
    pub fn one(value: T) -> Self {
        Sided::One { value }
    }

    /// The value off interfaces, or the clockwise limit on one.
    pub fn any(&self) -> T {
        match *self {
            Sided::One { value } => value,
            Sided::Two { cw, .. } => cw,
        }
    }

    pub fn sides(&self) -> [T; 2] {
        match *self {
            Sided::One { value } => [value, value],
            Sided::Two { ccw, cw, .. } => [ccw, cw],
        }
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> Sided<U> {
        match self {
            Sided::One { value } => Sided::One { value: f(value) },
            Sided::Two { ray, ccw, cw } => Sided::Two { ray, ccw: f(ccw), cw: f(cw) },
        }
    }
}

impl Sided<Vec2> {
    /// Size of the jump between the two one-sided limits.
    pub fn jump(&self) -> f64 {
        match *self {
            Sided::One { .. } => 0.0,
            Sided::Two { ccw, cw, .. } => (ccw - cw).norm(),
        }
    }
}

/// Which kind of ray a two-sided value sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "ray", rename_all = "snake_case")]
pub enum RayKind {
    Bisectrix { arc: usize },
    /// Endpoint of an arc facing a gap sector.
    Boundary { arc: usize, end: Side },
    /// Endpoint shared by the closures of two adjacent arcs.
    Shared { cw_arc: usize, ccw_arc: usize },
}

pub type Gradient = Sided<Vec2>;

fn check_half_angle(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < std::f64::consts::PI {
        Ok(())
    } else {
        Err(Error::BadHalfAngle(alpha))
    }
}

/// `cot(pi/2) = 0` exactly.
fn cot(alpha: f64) -> f64 {
    if alpha >= std::f64::consts::FRAC_PI_4 {
        (std::f64::consts::FRAC_PI_2 - alpha).tan()
    } else {
        alpha.cos() / alpha.sin()
    }
}

/// `y (|y| cot a - x)` without the sector test.
fn local_value(cot_a: f64, v: Vec2) -> f64 {
    v.y * (v.y.abs() * cot_a - v.x)
}

/// `(-y, 2|y| cot a - x)` without the sector test.
fn local_gradient(cot_a: f64, v: Vec2) -> Vec2 {
    Vec2::new(-v.y, 2.0 * v.y.abs() * cot_a - v.x)
}

/// `u_alpha`: the cone over the arc `{|theta| < alpha}`.
pub fn u_alpha(alpha: f64, v: Vec2) -> Result<f64> {
    check_half_angle(alpha)?;
    if v.is_zero() || v.angle().abs() >= alpha {
        return Ok(0.0);
    }
    Ok(local_value(cot(alpha), v))
}

/// Gradient of `u_alpha`, with both one-sided limits on the bisectrix and on
/// the two boundary rays.
pub fn grad_u_alpha(alpha: f64, v: Vec2) -> Result<Gradient> {
    check_half_angle(alpha)?;
    if v.is_zero() {
        return Ok(Sided::one(Vec2::ZERO));
    }
    let theta = v.angle();
    let inside = local_gradient(cot(alpha), v);
    if theta.abs() <= ANGLE_TOL {
        return Ok(Sided::Two { ray: RayKind::Bisectrix { arc: 0 }, ccw: inside, cw: inside });
    }
    if (theta.abs() - alpha).abs() <= ANGLE_TOL {
        let end = if theta > 0.0 { Side::Upper } else { Side::Lower };
        let ray = RayKind::Boundary { arc: 0, end };
        return Ok(match end {
            Side::Upper => Sided::Two { ray, ccw: Vec2::ZERO, cw: inside },
            Side::Lower => Sided::Two { ray, ccw: inside, cw: Vec2::ZERO },
        });
    }
    Ok(Sided::one(if theta.abs() < alpha { inside } else { Vec2::ZERO }))
}

/// Rotation and cotangent of one arc, cached for evaluation.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ArcFrame {
    pub(crate) rotation: Rotation,
    pub(crate) cot: f64,
    pub(crate) arc: Arc,
}

impl ArcFrame {
    pub(crate) fn new(arc: Arc) -> Self {
        Self { rotation: Rotation::new(arc.center()), cot: cot(arc.half_angle()), arc }
    }

    pub(crate) fn to_local(&self, v: Vec2) -> Vec2 {
        self.rotation.apply_inverse(v)
    }

    pub(crate) fn value(&self, v: Vec2) -> f64 {
        local_value(self.cot, self.to_local(v))
    }

    pub(crate) fn gradient(&self, v: Vec2) -> Vec2 {
        self.rotation.apply(local_gradient(self.cot, self.to_local(v)))
    }

    /// `grad u + (-y, x)` in closed form: `R (-2y', 2|y'| cot a)`.
    pub(crate) fn characteristic(&self, v: Vec2) -> Vec2 {
        let l = self.to_local(v);
        self.rotation.apply(Vec2::new(-2.0 * l.y, 2.0 * l.y.abs() * self.cot))
    }
}

/// The surface `C(I)` for a validated family.
#[derive(Clone, Debug)]
pub struct ConeSurface {
    family: ArcFamily,
    frames: Vec<ArcFrame>,
}

impl ConeSurface {
    pub fn new(family: ArcFamily) -> Self {
        let frames = family.arcs().iter().map(|&a| ArcFrame::new(a)).collect();
        Self { family, frames }
    }

    pub fn family(&self) -> &ArcFamily {
        &self.family
    }

    pub(crate) fn frame(&self, arc: usize) -> ArcFrame {
        match self.frames.get(arc) {
            Some(f) => *f,
            None => ArcFrame::new(self.family.arc(arc).expect("arc index from locate")),
        }
    }

    pub fn locate(&self, v: Vec2) -> Result<SectorLocation> {
        self.family.locate(v)
    }

    /// `u_I(v)`.
    pub fn evaluate(&self, v: Vec2) -> f64 {
        if v.is_zero() {
            return 0.0;
        }
        match self.family.locate(v) {
            Ok(loc) => loc.arc().map_or(0.0, |arc| self.frame(arc).value(v)),
            Err(_) => f64::NAN,
        }
    }

    /// Gradient of `u_I`; two-valued on bisectrices and arc boundary rays.
    pub fn gradient(&self, v: Vec2) -> Gradient {
        self.sided(v, |f, v| f.gradient(v), Vec2::ZERO)
    }

    /// Horizontality defect `(u_x - y, u_y + x)` of the graph normal. It
    /// vanishes exactly on the singular set.
    pub fn characteristic_vector(&self, v: Vec2) -> Sided<Vec2> {
        self.sided(v, |f, v| f.characteristic(v), v.perp())
    }

    /// Evaluate a per-arc closed form with the gap-sector value `outside`,
    /// splitting into one-sided limits on interface rays.
    fn sided(&self, v: Vec2, inside: impl Fn(&ArcFrame, Vec2) -> Vec2, outside: Vec2) -> Sided<Vec2> {
        if v.is_zero() {
            return Sided::one(Vec2::ZERO);
        }
        let Ok(loc) = self.family.locate(v) else {
            return Sided::one(Vec2::new(f64::NAN, f64::NAN));
        };
        match loc {
            SectorLocation::InsideI { arc, .. } => Sided::one(inside(&self.frame(arc), v)),
            SectorLocation::InsideJ { .. } | SectorLocation::OnAccumulationRay => Sided::one(outside),
            SectorLocation::OnBisectrix { arc } => {
                let g = inside(&self.frame(arc), v);
                Sided::Two { ray: RayKind::Bisectrix { arc }, ccw: g, cw: g }
            }
            SectorLocation::OnBoundaryRay { arc, end } => {
                let own = inside(&self.frame(arc), v);
                let (ray, other) = match self.family.neighbor_at(arc, end) {
                    Some(n) => {
                        let ray = match end {
                            Side::Upper => RayKind::Shared { cw_arc: arc, ccw_arc: n },
                            Side::Lower => RayKind::Shared { cw_arc: n, ccw_arc: arc },
                        };
                        (ray, inside(&self.frame(n), v))
                    }
                    None => (RayKind::Boundary { arc, end }, outside),
                };
                match end {
                    Side::Upper => Sided::Two { ray, ccw: other, cw: own },
                    Side::Lower => Sided::Two { ray, ccw: own, cw: other },
                }
            }
        }
    }

    /// Angles of every ray across which the closed forms change: arc
    /// endpoints and bisectrices of the finite arcs.
    pub fn crease_angles(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(3 * self.frames.len());
        for a in self.family.arcs() {
            out.extend([a.lower_end(), a.center(), a.upper_end()]);
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= ANGLE_TOL);
        if out.len() > 1 && (out[0] + std::f64::consts::TAU - out[out.len() - 1]) <= ANGLE_TOL {
            out.pop();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn half_circles() -> ConeSurface {
        ConeSurface::new(
            ArcFamily::validate(vec![Arc::new(0.0, FRAC_PI_2).unwrap(), Arc::new(PI, FRAC_PI_2).unwrap()])
                .unwrap(),
        )
    }

    #[test]
    fn u_alpha_examples() {
        let u = u_alpha(FRAC_PI_2, Vec2::new(1.0, 1.0)).unwrap();
        assert!((u + 1.0).abs() < 1e-15);
        let u = u_alpha(FRAC_PI_4, Vec2::new(2.0, 1.0)).unwrap();
        assert!((u + 1.0).abs() < 1e-15);
        assert_eq!(u_alpha(FRAC_PI_4, Vec2::new(0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(u_alpha(FRAC_PI_4, Vec2::new(-1.0, 0.0)).unwrap(), 0.0);
        assert!(matches!(u_alpha(0.0, Vec2::new(1.0, 0.0)), Err(Error::BadHalfAngle(_))));
        assert!(matches!(u_alpha(PI, Vec2::new(1.0, 0.0)), Err(Error::BadHalfAngle(_))));
    }

    #[test]
    fn grad_u_alpha_examples() {
        let g = grad_u_alpha(FRAC_PI_4, Vec2::new(2.0, 1.0)).unwrap().any();
        assert!((g - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(grad_u_alpha(FRAC_PI_4, Vec2::new(0.0, 3.0)).unwrap(), Sided::one(Vec2::ZERO));
        // boundary ray at angle pi/4: inner limit of u_x is -y, outer limit 0
        let p = Vec2::new(2.0, 2.0);
        match grad_u_alpha(FRAC_PI_4, p).unwrap() {
            Sided::Two { ray: RayKind::Boundary { end: Side::Upper, .. }, ccw, cw } => {
                assert_eq!(ccw, Vec2::ZERO);
                assert!((cw.x + p.y).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn half_circle_cone_is_minus_xy() {
        let c = half_circles();
        for &(x, y) in &[(1.0, 2.0), (-1.5, 0.3), (-0.2, -4.0), (3.0, -1.0), (0.0, 2.0)] {
            let v = Vec2::new(x, y);
            assert!((c.evaluate(v) + x * y).abs() <= 1e-15 * (x * x + y * y), "{v:?}");
        }
        let g = c.gradient(Vec2::new(1.0, 2.0)).any();
        assert!((g - Vec2::new(-2.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_on_gaps_and_bisectrix() {
        let c = ConeSurface::new(ArcFamily::validate(vec![Arc::new(1.0, 0.5).unwrap()]).unwrap());
        assert_eq!(c.evaluate(Vec2::polar(2.5) * 3.0), 0.0);
        assert!(c.evaluate(Vec2::polar(1.0) * 3.0).abs() < 1e-15);
        assert_eq!(c.gradient(Vec2::polar(3.0)), Sided::one(Vec2::ZERO));
        assert_eq!(c.evaluate(Vec2::ZERO), 0.0);
    }

    #[test]
    fn shared_ray_tangential_derivative() {
        // two adjacent arcs sharing the ray at angle 0.4
        let f = ArcFamily::validate(vec![Arc::new(0.1, 0.3).unwrap(), Arc::new(0.9, 0.5).unwrap()]).unwrap();
        let c = ConeSurface::new(f);
        let s = 2.5;
        let dir = Vec2::polar(0.4);
        match c.gradient(dir * s) {
            Sided::Two { ray: RayKind::Shared { cw_arc: 0, ccw_arc: 1 }, ccw, cw } => {
                // across the ray the whole gradient agrees, and the normal derivative equals s
                assert!((ccw - cw).norm() < 1e-12);
                assert!((cw.dot(dir.perp()) - s).abs() < 1e-12);
                assert!(cw.dot(dir).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn characteristic_vector_examples() {
        let plane = ConeSurface::new(ArcFamily::empty());
        let v = Vec2::new(0.3, -2.0);
        assert_eq!(plane.characteristic_vector(v).any(), v.perp());
        assert_eq!(plane.characteristic_vector(Vec2::ZERO).any(), Vec2::ZERO);

        let a = 0.7;
        let c = ConeSurface::new(ArcFamily::validate(vec![Arc::new(0.0, a).unwrap()]).unwrap());
        let on = c.characteristic_vector(Vec2::new(1.5, 0.0));
        assert_eq!(on.sides(), [Vec2::ZERO, Vec2::ZERO]);
        let p = Vec2::new(2.0, 0.4);
        let n = c.characteristic_vector(p).any();
        let expect = Vec2::new(-2.0 * p.y, 2.0 * p.y * cot(a));
        assert!((n - expect).norm() < 1e-15);
    }

    #[test]
    fn crease_angles_dedup() {
        let c = half_circles();
        let ang = c.crease_angles();
        assert_eq!(ang.len(), 4);
    }
}
