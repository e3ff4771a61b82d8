//! Families of disjoint open arcs of the unit circle.
//!
//! An [`Arc`] is stored by its center angle and half-angle `alpha`; it is the
//! set of angles at angular distance `< alpha` from the center. A validated
//! [`ArcFamily`] keeps its arcs sorted by center and carries the complementary
//! open arcs (the gaps). Countable families are represented by a finite prefix
//! plus a [`GeometricTail`] of arcs shrinking geometrically towards an
//! accumulation angle.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ccw_distance, normalize_angle, signed_offset, Vec2};

/// Absolute tolerance (radians) used to decide that two arc endpoints
/// coincide or that a direction lies on a ray.
pub const ANGLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    center: f64,
    half_angle: f64,
}

impl Arc {
    pub fn new(center: f64, half_angle: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::NonFinite);
        }
        if !(half_angle > 0.0 && half_angle < PI) {
            return Err(Error::BadHalfAngle(half_angle));
        }
        Ok(Self { center: normalize_angle(center), half_angle })
    }

    pub fn from_degrees(center_deg: f64, half_angle_deg: f64) -> Result<Self> {
        Self::new(center_deg.to_radians(), half_angle_deg.to_radians())
    }

    /// Angle of the bisectrix, in `[0, 2pi)`.
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_angle
    }

    /// Angle of the clockwise (lower) endpoint.
    pub fn lower_end(&self) -> f64 {
        normalize_angle(self.center - self.half_angle)
    }

    /// Angle of the counterclockwise (upper) endpoint.
    pub fn upper_end(&self) -> f64 {
        normalize_angle(self.center + self.half_angle)
    }

    pub fn end(&self, side: Side) -> f64 {
        match side {
            Side::Upper => self.upper_end(),
            Side::Lower => self.lower_end(),
        }
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        signed_offset(theta, self.center).abs() < self.half_angle
    }
}

/// Open gap between arcs: starts at `start` and runs counterclockwise for
/// `length` radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub start: f64,
    pub length: f64,
}

impl Gap {
    pub fn end(&self) -> f64 {
        normalize_angle(self.start + self.length)
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        if self.length >= TAU {
            return true;
        }
        let d = ccw_distance(self.start, theta);
        d > 0.0 && d < self.length
    }
}

/// Arcs `n = 0, 1, 2, ...` with center `acc + (c0 - acc) r^n` and half-angle
/// `a0 r^n`, accumulating at `acc`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricTail {
    pub accumulate_at: f64,
    pub first_center: f64,
    pub ratio: f64,
    pub first_half_angle: f64,
}

impl GeometricTail {
    fn validate(&self) -> Result<()> {
        let finite = [self.accumulate_at, self.first_center, self.ratio, self.first_half_angle]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite);
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidTail(format!("ratio {} is outside (0, 1)", self.ratio)));
        }
        if !(self.first_half_angle > 0.0 && self.first_half_angle < PI) {
            return Err(Error::BadHalfAngle(self.first_half_angle));
        }
        let d0 = self.first_offset().abs();
        // consecutive arcs n, n+1 are disjoint iff d0 (1 - r) >= a0 (1 + r)
        let spacing = d0 * (1.0 - self.ratio) - self.first_half_angle * (1.0 + self.ratio);
        if spacing < -ANGLE_TOL {
            return Err(Error::InvalidTail("consecutive tail arcs overlap".into()));
        }
        if d0 + self.first_half_angle >= PI {
            return Err(Error::InvalidTail("tail hull wraps past the antipode".into()));
        }
        Ok(())
    }

    /// Signed offset of the first center from the accumulation angle.
    fn first_offset(&self) -> f64 {
        signed_offset(self.first_center, self.accumulate_at)
    }

    fn direction(&self) -> f64 {
        self.first_offset().signum()
    }

    pub fn arc(&self, n: usize) -> Arc {
        let scale = self.ratio.powi(n as i32);
        Arc {
            center: normalize_angle(self.accumulate_at + self.first_offset() * scale),
            half_angle: self.first_half_angle * scale,
        }
    }

    /// Closed angular hull `[start, start + length]` containing every tail arc.
    pub fn hull(&self) -> Gap {
        let span = self.first_offset().abs() + self.first_half_angle;
        if self.direction() > 0.0 {
            Gap { start: normalize_angle(self.accumulate_at), length: span }
        } else {
            Gap { start: normalize_angle(self.accumulate_at - span), length: span }
        }
    }

    /// Distance (towards the arcs) of `theta` from the accumulation angle.
    fn depth(&self, theta: f64) -> f64 {
        signed_offset(theta, self.accumulate_at) * self.direction()
    }

    /// Indices of the tail arcs that could contain or touch `theta`.
    fn candidates(&self, theta: f64) -> std::ops::Range<usize> {
        let depth = self.depth(theta);
        let d0 = self.first_offset().abs();
        if depth <= 0.0 || depth > d0 + self.first_half_angle + ANGLE_TOL {
            return 0..0;
        }
        let n = ((depth / d0).ln() / self.ratio.ln()).floor();
        let n = if n.is_finite() { n.clamp(0.0, 4096.0) as usize } else { 4096 };
        n.saturating_sub(1)..n + 3
    }
}

/// Upper = counterclockwise of the bisectrix, Lower = clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Upper => Side::Lower,
            Side::Lower => Side::Upper,
        }
    }
}

/// Region of the plane containing a nonzero point.
///
/// Arc indices count the finite arcs first, then tail arc `n` as
/// `arcs().len() + n`. Gap indices count [`ArcFamily::complementary`] first,
/// then the gap between tail arcs `n` and `n + 1` as `complementary().len() + n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum SectorLocation {
    InsideI { arc: usize, side: Side },
    InsideJ { gap: usize },
    OnBisectrix { arc: usize },
    OnBoundaryRay { arc: usize, end: Side },
    OnAccumulationRay,
}

impl SectorLocation {
    /// The arc whose closed sector contains the point, if any.
    pub fn arc(&self) -> Option<usize> {
        match *self {
            SectorLocation::InsideI { arc, .. }
            | SectorLocation::OnBisectrix { arc }
            | SectorLocation::OnBoundaryRay { arc, .. } => Some(arc),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcFamily {
    arcs: Vec<Arc>,
    complementary: Vec<Gap>,
    tail: Option<GeometricTail>,
}

impl ArcFamily {
    /// Validate a finite family.
    pub fn validate(arcs: Vec<Arc>) -> Result<Self> {
        Self::with_tail(arcs, None)
    }

    /// Validate a finite prefix plus an optional geometric tail. Finite arcs
    /// may not meet the interior of the tail hull.
    pub fn with_tail(mut arcs: Vec<Arc>, tail: Option<GeometricTail>) -> Result<Self> {
        for a in &arcs {
            if !(a.half_angle > 0.0 && a.half_angle < PI) {
                return Err(Error::BadHalfAngle(a.half_angle));
            }
        }
        if let Some(t) = &tail {
            t.validate()?;
        }
        arcs.sort_by(|a, b| a.center.total_cmp(&b.center));

        // (start, length, index) with index == arcs.len() for the tail hull
        let mut intervals: Vec<(f64, f64, usize)> =
            arcs.iter().enumerate().map(|(i, a)| (a.lower_end(), a.length(), i)).collect();
        if let Some(t) = &tail {
            let h = t.hull();
            intervals.push((h.start, h.length, arcs.len()));
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut complementary = Vec::new();
        let m = intervals.len();
        if m == 0 {
            complementary.push(Gap { start: 0.0, length: TAU });
        }
        for i in 0..m {
            let (s, l, idx) = intervals[i];
            let (ns, _, nidx) = intervals[(i + 1) % m];
            let next_start = if i + 1 < m { ns } else { ns + TAU };
            let gap = next_start - (s + l);
            if gap < -ANGLE_TOL {
                return Err(Error::OverlappingArcs { first: idx.min(nidx), second: idx.max(nidx) });
            }
            if gap > ANGLE_TOL {
                complementary.push(Gap { start: normalize_angle(s + l), length: gap });
            }
        }
        complementary.sort_by(|a, b| a.start.total_cmp(&b.start));
        Ok(Self { arcs, complementary, tail })
    }

    pub fn empty() -> Self {
        Self::validate(Vec::new()).expect("empty family is valid")
    }

    /// The finite arcs, sorted by center angle.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Gaps between finite arcs (and the tail hull), sorted by start angle.
    pub fn complementary(&self) -> &[Gap] {
        &self.complementary
    }

    pub fn tail(&self) -> Option<&GeometricTail> {
        self.tail.as_ref()
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty() && self.tail.is_none()
    }

    /// Arc by global index (finite arcs first, then the tail).
    pub fn arc(&self, index: usize) -> Option<Arc> {
        if index < self.arcs.len() {
            Some(self.arcs[index])
        } else {
            self.tail.map(|t| t.arc(index - self.arcs.len()))
        }
    }

    /// Finite family made of the finite arcs plus the first `tail_arcs` arcs
    /// of the tail.
    pub fn truncate(&self, tail_arcs: usize) -> Self {
        let mut arcs = self.arcs.clone();
        if let Some(t) = &self.tail {
            arcs.extend((0..tail_arcs).map(|n| t.arc(n)));
        }
        Self::validate(arcs).expect("truncation of a valid family is valid")
    }

    /// Same family rotated counterclockwise by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let arcs = self.arcs.iter().map(|a| Arc { center: normalize_angle(a.center + angle), ..*a }).collect();
        let tail = self.tail.map(|t| GeometricTail {
            accumulate_at: normalize_angle(t.accumulate_at + angle),
            first_center: normalize_angle(t.first_center + angle),
            ..t
        });
        Self::with_tail(arcs, tail).expect("rotation preserves validity")
    }

    /// Closures of the finite arcs tile the circle.
    pub fn is_covering(&self) -> bool {
        self.tail.is_none() && !self.arcs.is_empty() && self.complementary.is_empty()
    }

    /// Total length of the finite arcs.
    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(Arc::length).sum()
    }

    /// Arcs (by global index) that could contain `theta` in their closure.
    fn candidates(&self, theta: f64) -> Vec<usize> {
        let mut out = Vec::with_capacity(4);
        let k = self.arcs.len();
        if k > 0 {
            // any arc containing theta is the cyclic predecessor or successor by center
            let pos = self.arcs.partition_point(|a| a.center <= theta);
            out.push((pos + k - 1) % k);
            if k > 1 {
                out.push(pos % k);
            }
        }
        if let Some(t) = &self.tail {
            out.extend(t.candidates(theta).map(|n| k + n));
        }
        out
    }

    /// Classify the direction `theta` relative to the arcs' closed sectors.
    fn locate_angle(&self, theta: f64) -> Option<SectorLocation> {
        let mut interior = None;
        let mut boundary = None;
        for idx in self.candidates(theta) {
            let arc = self.arc(idx).expect("candidate index is valid");
            let d = signed_offset(theta, arc.center);
            if d.abs() <= ANGLE_TOL {
                return Some(SectorLocation::OnBisectrix { arc: idx });
            }
            let side = if d > 0.0 { Side::Upper } else { Side::Lower };
            if (d.abs() - arc.half_angle).abs() <= ANGLE_TOL {
                boundary.get_or_insert(SectorLocation::OnBoundaryRay { arc: idx, end: side });
            } else if d.abs() < arc.half_angle {
                interior = Some(SectorLocation::InsideI { arc: idx, side });
            }
        }
        boundary.or(interior)
    }

    /// Region of the plane containing the nonzero point `v`.
    pub fn locate(&self, v: Vec2) -> Result<SectorLocation> {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        if v.is_zero() {
            return Err(Error::OriginQuery);
        }
        let theta = normalize_angle(v.angle());
        if let Some(loc) = self.locate_angle(theta) {
            return Ok(loc);
        }
        if let Some(t) = &self.tail {
            let depth = t.depth(theta);
            if depth.abs() <= ANGLE_TOL {
                return Ok(SectorLocation::OnAccumulationRay);
            }
            if let Some(n) = self.tail_gap(t, theta) {
                return Ok(SectorLocation::InsideJ { gap: self.complementary.len() + n });
            }
        }
        let gap = self
            .complementary
            .iter()
            .position(|g| g.contains_angle(theta))
            .expect("a direction outside every arc lies in some gap");
        Ok(SectorLocation::InsideJ { gap })
    }

    /// Index `n` of the gap between tail arcs `n` and `n + 1` containing `theta`.
    fn tail_gap(&self, t: &GeometricTail, theta: f64) -> Option<usize> {
        let depth = t.depth(theta);
        let d0 = t.first_offset().abs();
        if depth <= 0.0 || depth >= d0 - t.first_half_angle {
            return None;
        }
        let r = t.ratio;
        let mut n = ((depth / (d0 - t.first_half_angle)).ln() / r.ln()).floor().max(0.0) as usize;
        // inner edge of arc n is (d0 - a0) r^n, outer edge of arc n+1 is (d0 + a0) r^(n+1)
        for _ in 0..128 {
            let inner = (d0 - t.first_half_angle) * r.powi(n as i32);
            let outer_next = (d0 + t.first_half_angle) * r.powi(n as i32 + 1);
            if depth >= inner && n > 0 {
                n -= 1;
            } else if depth <= outer_next {
                n += 1;
            } else {
                return Some(n);
            }
        }
        Some(n)
    }

    /// Arc (other than `arc`) whose closure shares the `end` endpoint of `arc`.
    pub fn neighbor_at(&self, arc: usize, end: Side) -> Option<usize> {
        let a = self.arc(arc)?;
        let angle = a.end(end);
        self.candidates(angle).into_iter().find(|&j| {
            j != arc
                && self
                    .arc(j)
                    .map(|b| signed_offset(b.end(end.opposite()), angle).abs() <= ANGLE_TOL)
                    .unwrap_or(false)
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ArcJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    center_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_angle_rad: Option<f64>,
    #[serde(default, skip_serializing)]
    center_deg: Option<f64>,
    #[serde(default, skip_serializing)]
    half_angle_deg: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct TailJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    accumulate_at_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_center_rad: Option<f64>,
    ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_half_angle_rad: Option<f64>,
    #[serde(default, skip_serializing)]
    accumulate_at_deg: Option<f64>,
    #[serde(default, skip_serializing)]
    first_center_deg: Option<f64>,
    #[serde(default, skip_serializing)]
    first_half_angle_deg: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    #[serde(default)]
    arcs: Vec<ArcJson>,
    #[serde(default)]
    tail: Option<TailJson>,
}

fn pick(name: &str, rad: Option<f64>, deg: Option<f64>) -> Result<f64> {
    match (rad, deg) {
        (Some(r), None) => Ok(r),
        (None, Some(d)) => Ok(d.to_radians()),
        (Some(_), Some(_)) => Err(Error::Parse(format!("both {name}_rad and {name}_deg given"))),
        (None, None) => Err(Error::Parse(format!("missing {name}_rad"))),
    }
}

impl ArcFamily {
    /// Parse the arcs JSON schema; `_deg` keys are accepted in place of `_rad`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: FamilyJson = serde_json::from_str(s)?;
        let arcs = raw
            .arcs
            .iter()
            .map(|a| {
                Arc::new(
                    pick("center", a.center_rad, a.center_deg)?,
                    pick("half_angle", a.half_angle_rad, a.half_angle_deg)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let tail = raw
            .tail
            .map(|t| -> Result<GeometricTail> {
                Ok(GeometricTail {
                    accumulate_at: pick("accumulate_at", t.accumulate_at_rad, t.accumulate_at_deg)?,
                    first_center: pick("first_center", t.first_center_rad, t.first_center_deg)?,
                    ratio: t.ratio,
                    first_half_angle: pick(
                        "first_half_angle",
                        t.first_half_angle_rad,
                        t.first_half_angle_deg,
                    )?,
                })
            })
            .transpose()?;
        Self::with_tail(arcs, tail)
    }

    /// Normalized JSON value: radians only, arcs sorted by center.
    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = FamilyJson {
            arcs: self
                .arcs
                .iter()
                .map(|a| ArcJson {
                    center_rad: Some(a.center),
                    half_angle_rad: Some(a.half_angle),
                    center_deg: None,
                    half_angle_deg: None,
                })
                .collect(),
            tail: self.tail.map(|t| TailJson {
                accumulate_at_rad: Some(t.accumulate_at),
                first_center_rad: Some(t.first_center),
                ratio: t.ratio,
                first_half_angle_rad: Some(t.first_half_angle),
                accumulate_at_deg: None,
                first_center_deg: None,
                first_half_angle_deg: None,
            }),
        };
        serde_json::to_value(raw).expect("family serializes")
    }
}
