//! Singular set, characteristic lines, C1 regularity and the classification
//! of C1 minimal cones.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::{ConeSurface, RayKind, Sided};
use crate::arcs::{ArcFamily, SectorLocation, Side};
use crate::error::{Error, Result};
use crate::geom::{signed_offset, Vec2};
use crate::hgroup::{lift_curve, HPoint, PlanarCurve};

/// Singular set of a surface through the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "ray_angles", rename_all = "snake_case")]
pub enum SingularSet {
    Empty,
    Origin,
    /// Horizontal half-lines from the origin at the given angles.
    Rays(Vec<f64>),
}

impl ConeSurface {
    /// The origin together with the bisectrix of every arc.
    pub fn singular_set(&self) -> Result<SingularSet> {
        if !self.family().is_finite() {
            return Err(Error::InfiniteFamily);
        }
        let arcs = self.family().arcs();
        Ok(if arcs.is_empty() {
            SingularSet::Origin
        } else {
            SingularSet::Rays(arcs.iter().map(|a| a.center()).collect())
        })
    }

    /// Sample the characteristic vector on and off the singular rays.
    ///
    /// Off-ray samples keep an angular distance of at least `margin` from
    /// every bisectrix; the reported ratio is `min |N(v)| / |v|` over them.
    pub fn audit_singular_set(&self, radius: f64, samples: usize, margin: f64) -> Result<SingularAudit> {
        let set = self.singular_set()?;
        let rays = match &set {
            SingularSet::Rays(r) => r.clone(),
            _ => Vec::new(),
        };
        let mut max_on_ray: f64 = self.characteristic_vector(Vec2::ZERO).any().norm();
        for &angle in &rays {
            for i in 1..=samples {
                let v = Vec2::from_polar(radius * i as f64 / samples as f64, angle);
                for side in self.characteristic_vector(v).sides() {
                    max_on_ray = max_on_ray.max(side.norm());
                }
            }
        }
        let mut min_off_ratio = f64::INFINITY;
        let n_angles = 4 * samples.max(8);
        for j in 0..n_angles {
            let theta = std::f64::consts::TAU * (j as f64 + 0.5) / n_angles as f64;
            if rays.iter().any(|&a| signed_offset(theta, a).abs() < margin) {
                continue;
            }
            for i in 1..=4 {
                let v = Vec2::from_polar(radius * i as f64 / 4.0, theta);
                for side in self.characteristic_vector(v).sides() {
                    min_off_ratio = min_off_ratio.min(side.norm() / v.norm());
                }
            }
        }
        Ok(SingularAudit { singular_set: set, max_on_ray, min_off_ratio })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularAudit {
    pub singular_set: SingularSet,
    /// Largest `|N|` over samples on the singular rays (and the origin).
    pub max_on_ray: f64,
    /// Smallest `|N(v)| / |v|` over samples away from the singular rays.
    pub min_off_ratio: f64,
}

/// Planar projection of the characteristic half-line through a regular point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharacteristicRay {
    /// Start of the half-line: the origin for gap sectors, a point of the
    /// bisectrix for arc sectors. The surface has height 0 there.
    pub foot: Vec2,
    pub direction: Vec2,
}

impl CharacteristicRay {
    pub fn point_at(&self, s: f64) -> Vec2 {
        self.foot + self.direction * s
    }

    /// Polyline from the foot out to distance `length`, `segments` pieces.
    pub fn to_curve(&self, length: f64, segments: usize) -> PlanarCurve {
        let segments = segments.max(1);
        let vs = (0..=segments).map(|i| self.point_at(length * i as f64 / segments as f64)).collect();
        PlanarCurve::new(vs).expect("at least two vertices")
    }

    /// Horizontal lift of [`to_curve`](Self::to_curve) from height 0 at the foot.
    pub fn lift(&self, length: f64, segments: usize) -> Vec<HPoint> {
        lift_curve(&self.to_curve(length, segments), 0.0)
    }
}

impl ConeSurface {
    /// The characteristic half-line through `v`.
    pub fn characteristic_ray(&self, v: Vec2) -> Result<CharacteristicRay> {
        if v.is_zero() {
            return Err(Error::SingularPoint(v.x, v.y));
        }
        let radial = CharacteristicRay { foot: Vec2::ZERO, direction: v.normalized() };
        match self.locate(v)? {
            SectorLocation::OnBisectrix { .. } => Err(Error::SingularPoint(v.x, v.y)),
            SectorLocation::InsideI { arc, side } => {
                let f = self.frame(arc);
                let l = f.to_local(v);
                let a = f.arc.half_angle();
                let foot = Vec2::new(l.x - l.y.abs() * f.cot, 0.0);
                let dir = Vec2::new(a.cos(), side.sign() * a.sin());
                Ok(CharacteristicRay { foot: f.rotation.apply(foot), direction: f.rotation.apply(dir) })
            }
            // gap sectors, arc boundary rays and the accumulation ray are radial
            _ => Ok(radial),
        }
    }
}

/// One-sided gradient jump across an interface ray.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InterfaceJump {
    pub angle: f64,
    pub ray: Option<RayKind>,
    pub ccw: Vec2,
    pub cw: Vec2,
    pub jump: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct C1Report {
    pub c1: bool,
    /// Why the surface is or is not C1.
    pub reason: String,
    /// For a non-C1 surface: an interface ray with a gradient jump.
    pub witness: Option<InterfaceJump>,
    /// Largest one-sided gradient disagreement over all interface rays at
    /// radius 1 (closed-form limits).
    pub max_interface_jump: f64,
}

/// Tolerance for the closed-form check that shared rays carry no jump.
pub const C1_CONFIRM_TOL: f64 = 1e-10;

impl ConeSurface {
    /// Closed-form one-sided limits on every interface ray at `radius`.
    pub fn interface_jumps(&self, radius: f64) -> Vec<InterfaceJump> {
        self.crease_angles()
            .into_iter()
            .map(|angle| {
                let g = self.gradient(Vec2::from_polar(radius, angle));
                let [ccw, cw] = g.sides();
                let ray = match g {
                    Sided::Two { ray, .. } => Some(ray),
                    Sided::One { .. } => None,
                };
                InterfaceJump { angle, ray, ccw, cw, jump: (ccw - cw).norm() }
            })
            .collect()
    }

    /// Numeric one-sided probe: gradients at angular offsets `+-h` from each
    /// interface ray at `radius`. Independent of the covering predicate.
    pub fn probe_gradient_jumps(&self, radius: f64, h: f64) -> Vec<InterfaceJump> {
        let mut angles = self.crease_angles();
        if let Some(t) = self.family().tail() {
            angles.push(t.accumulate_at);
        }
        angles
            .into_iter()
            .map(|angle| {
                let ccw = self.gradient(Vec2::from_polar(radius, angle + h)).any();
                let cw = self.gradient(Vec2::from_polar(radius, angle - h)).any();
                InterfaceJump { angle, ray: None, ccw, cw, jump: (ccw - cw).norm() }
            })
            .collect()
    }

    /// C1 iff the family is finite and its closures tile the circle. The
    /// empty family is the plane `{t = 0}` and counts as C1.
    pub fn is_c1(&self) -> C1Report {
        let family = self.family();
        if let Some(t) = family.tail() {
            let first = t.arc(0);
            let end = Side::Upper;
            let v = Vec2::polar(first.end(end));
            let g = self.gradient(v);
            let [ccw, cw] = g.sides();
            return C1Report {
                c1: false,
                reason: "infinite family: the gradient oscillates near the accumulation ray".into(),
                witness: Some(InterfaceJump {
                    angle: first.end(end),
                    ray: match g {
                        Sided::Two { ray, .. } => Some(ray),
                        _ => None,
                    },
                    ccw,
                    cw,
                    jump: (ccw - cw).norm(),
                }),
                max_interface_jump: f64::NAN,
            };
        }
        let jumps = self.interface_jumps(1.0);
        let max_jump = jumps.iter().map(|j| j.jump).fold(0.0, f64::max);
        if family.is_empty() {
            return C1Report {
                c1: true,
                reason: "empty family: the horizontal plane".into(),
                witness: None,
                max_interface_jump: max_jump,
            };
        }
        if family.is_covering() {
            let ok = max_jump <= C1_CONFIRM_TOL;
            C1Report {
                c1: ok,
                reason: if ok {
                    "finite covering family".into()
                } else {
                    format!("covering family but one-sided gradients differ by {max_jump:e}")
                },
                witness: None,
                max_interface_jump: max_jump,
            }
        } else {
            let witness = jumps.into_iter().find(|j| matches!(j.ray, Some(RayKind::Boundary { .. })));
            C1Report {
                c1: false,
                reason: "arc closures do not cover the circle".into(),
                witness,
                max_interface_jump: max_jump,
            }
        }
    }
}

/// Symbolic description of the inputs accepted by [`classify`].
#[derive(Clone, Copy, Debug)]
pub enum SurfaceSpec<'a> {
    /// Vertical plane through the origin with the given planar normal.
    VerticalPlane { normal: Vec2 },
    HorizontalPlane,
    Cone(&'a ConeSurface),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceKind {
    VerticalPlane { normal: Vec2 },
    HorizontalPlane,
    ArcCone { arc_centers: Vec<f64>, half_angles: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceClassification {
    pub kind: SurfaceKind,
    pub singular_set: SingularSet,
}

/// Sort a C1 minimal cone into vertical plane, horizontal plane or a cone
/// over a covering arc family, with its singular set.
pub fn classify(input: SurfaceSpec<'_>) -> Result<SurfaceClassification> {
    match input {
        SurfaceSpec::VerticalPlane { normal } => {
            let n = normal.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::Parse("vertical plane normal must be nonzero".into()));
            }
            Ok(SurfaceClassification {
                kind: SurfaceKind::VerticalPlane { normal: normal * (1.0 / n) },
                singular_set: SingularSet::Empty,
            })
        }
        SurfaceSpec::HorizontalPlane => Ok(SurfaceClassification {
            kind: SurfaceKind::HorizontalPlane,
            singular_set: SingularSet::Origin,
        }),
        SurfaceSpec::Cone(cone) => {
            let report = cone.is_c1();
            if !report.c1 {
                return Err(Error::NotC1(report.reason));
            }
            let family = cone.family();
            if family.is_empty() {
                return classify(SurfaceSpec::HorizontalPlane);
            }
            Ok(SurfaceClassification {
                kind: SurfaceKind::ArcCone {
                    arc_centers: family.arcs().iter().map(|a| a.center()).collect(),
                    half_angles: family.arcs().iter().map(|a| a.half_angle()).collect(),
                },
                singular_set: cone.singular_set()?,
            })
        }
    }
}

/// Per-arc extremes of the derivative across the bisectrix.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ArcOscillation {
    pub arc: usize,
    pub center: f64,
    pub half_angle: f64,
    /// Extremes of the derivative orthogonal to the bisectrix, divided by the
    /// probe radius.
    pub min: f64,
    pub max: f64,
    /// `max - min`.
    pub amplitude: f64,
    /// `max |u(v)| / (|v|^2 tan(alpha))` over the samples; at most 1.
    pub value_bound_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationReport {
    pub radius: f64,
    pub arcs: Vec<ArcOscillation>,
    pub min_amplitude: f64,
    pub sup_gradient: f64,
    /// `C * radius`, with `C` the gradient constant of the sampled arcs.
    pub gradient_bound: f64,
}

/// Constant `C` with `|grad u_alpha(v)| <= C |v|`.
///
/// In the rotated frame `|grad|^2 / |v|^2 = 1 + 4 sin|t| cot(a) sin(t - a) / sin(a)`
/// on the sector `|t| < a`, which is at most 1 for `a <= pi/2`. For obtuse
/// arcs the triangle inequality gives `1 + 2|cot a|`.
pub fn gradient_constant(alpha: f64) -> f64 {
    if alpha <= FRAC_PI_2 {
        1.0
    } else {
        1.0 + 2.0 * (alpha.cos() / alpha.sin()).abs()
    }
}

impl ConeSurface {
    /// Sample the tail arcs near the accumulation ray at `|v| = radius` and
    /// report how the transverse derivative swings inside each arc.
    pub fn oscillation_probe(&self, radius: f64, arcs: usize, samples: usize) -> Result<OscillationReport> {
        let tail = self.family().tail().ok_or(Error::NoTail)?;
        if !(radius > 0.0) {
            return Err(Error::BadDomain(format!("probe radius must be positive, got {radius}")));
        }
        let k = self.family().arcs().len();
        let samples = samples.max(3);
        let mut out = Vec::with_capacity(arcs);
        let mut sup_gradient: f64 = 0.0;
        let mut constant: f64 = 0.0;
        for n in 0..arcs {
            let arc = tail.arc(n);
            let a = arc.half_angle();
            let normal = Vec2::polar(arc.center()).perp();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut value_ratio: f64 = 0.0;
            // interior offsets, plus two just inside the endpoints
            let offsets = (0..samples)
                .map(|j| a * (-1.0 + (2 * j + 1) as f64 / samples as f64))
                .chain([a * (1.0 - 1e-6), -a * (1.0 - 1e-6), 0.0]);
            for d in offsets {
                let v = Vec2::from_polar(radius, arc.center() + d);
                let g = self.gradient(v).any();
                let dn = g.dot(normal) / radius;
                lo = lo.min(dn);
                hi = hi.max(dn);
                sup_gradient = sup_gradient.max(g.norm());
                value_ratio = value_ratio.max(self.evaluate(v).abs() / (radius * radius * a.tan()));
            }
            constant = constant.max(gradient_constant(a));
            out.push(ArcOscillation {
                arc: k + n,
                center: arc.center(),
                half_angle: a,
                min: lo,
                max: hi,
                amplitude: hi - lo,
                value_bound_ratio: value_ratio,
            });
        }
        let min_amplitude = out.iter().map(|o| o.amplitude).fold(f64::INFINITY, f64::min);
        Ok(OscillationReport {
            radius,
            arcs: out,
            min_amplitude,
            sup_gradient,
            gradient_bound: constant * radius,
        })
    }
}

/// Cone over a family that must be finite.
pub fn finite_cone(family: ArcFamily) -> Result<ConeSurface> {
    if !family.is_finite() {
        return Err(Error::InfiniteFamily);
    }
    Ok(ConeSurface::new(family))
}
