//! Calibrating vector field of `C(I)` and the checks that make it a
//! certificate of minimality.
//!
//! The plane is cut into gap sectors and half-sectors of each arc (between
//! the bisectrix and one boundary ray). Over a gap sector the field is
//! `(yX - xY)/|v|`; over a half-sector it is the constant upward unit normal
//! of the surface there. The field is invariant along `t`. Its distributional
//! divergence vanishes iff the divergence vanishes inside every region and
//! the normal components balance across every interface ray.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arcs::{Side, ANGLE_TOL};
use crate::cone::ConeSurface;
use crate::error::{Error, Result};
use crate::geom::{ccw_distance, normalize_angle, Rotation, Vec2};
use crate::hgroup::{divergence_at, HPoint, HVector, HorizontalField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionKind {
    JSector { gap: usize },
    IHalf { arc: usize, side: Side },
}

/// Coefficients `(v1, v2)` of a region's field in the `(X, Y)` frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionField {
    /// `(y, -x) / sqrt(x^2 + y^2)`.
    Radial,
    Constant { value: HVector },
    /// `v1 = a0 + a1 x + a2 y`, `v2 = b0 + b1 x + b2 y`.
    Affine { a: [f64; 3], b: [f64; 3] },
}

impl RegionField {
    pub fn at(&self, v: Vec2) -> HVector {
        match *self {
            RegionField::Radial => {
                let r = v.norm();
                if r == 0.0 {
                    HVector::default()
                } else {
                    HVector::new(v.y / r, -v.x / r)
                }
            }
            RegionField::Constant { value } => value,
            RegionField::Affine { a, b } => {
                HVector::new(a[0] + a[1] * v.x + a[2] * v.y, b[0] + b[1] * v.x + b[2] * v.y)
            }
        }
    }

    /// Divergence as an exact expression, independent of any sample point.
    pub fn symbolic_divergence(&self) -> f64 {
        match *self {
            // d/dx (y/r) + d/dy (-x/r) = -xy/r^3 + xy/r^3
            RegionField::Radial => 0.0,
            RegionField::Constant { .. } => 0.0,
            RegionField::Affine { a, b } => a[1] + b[2],
        }
    }
}

impl HorizontalField for RegionField {
    fn coefficients(&self, p: HPoint) -> HVector {
        self.at(p.planar())
    }

    fn jacobian(&self, p: HPoint) -> [[f64; 3]; 2] {
        match *self {
            RegionField::Radial => {
                let (x, y) = (p.x, p.y);
                let r = x.hypot(y);
                let r3 = r * r * r;
                [[-x * y / r3, x * x / r3, 0.0], [-y * y / r3, x * y / r3, 0.0]]
            }
            RegionField::Constant { .. } => [[0.0; 3]; 2],
            RegionField::Affine { a, b } => [[a[1], a[2], 0.0], [b[1], b[2], 0.0]],
        }
    }
}

/// Planar cone `{start <= angle <= start + span}` carrying one smooth field.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Region {
    pub kind: RegionKind,
    pub start: f64,
    pub span: f64,
    pub field: RegionField,
}

impl Region {
    pub fn end(&self) -> f64 {
        normalize_angle(self.start + self.span)
    }

    fn offset(&self, theta: f64) -> f64 {
        ccw_distance(self.start, theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterfaceKind {
    Bisectrix { arc: usize },
    /// Between a half-sector and a gap sector.
    ArcBoundary { arc: usize, gap: usize },
    /// Between half-sectors of two adjacent arcs.
    SharedEndpoint { cw_arc: usize, ccw_arc: usize },
    Other,
}

/// Ray at `angle` separating `cw_region` (clockwise side) from `ccw_region`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Interface {
    pub angle: f64,
    pub cw_region: usize,
    pub ccw_region: usize,
    pub kind: InterfaceKind,
}

impl Interface {
    /// Outward unit normal of the clockwise region along the ray.
    pub fn cw_normal(&self) -> Vec2 {
        Vec2::polar(self.angle).perp()
    }

    /// Outward unit normal of the counterclockwise region along the ray.
    pub fn ccw_normal(&self) -> Vec2 {
        -self.cw_normal()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorDecomposition {
    pub regions: Vec<Region>,
    pub interfaces: Vec<Interface>,
}

impl SectorDecomposition {
    /// Cut the plane along the bisectrices and the arc endpoints.
    pub fn new(cone: &ConeSurface) -> Result<Self> {
        let family = cone.family();
        if !family.is_finite() {
            return Err(Error::InfiniteFamily);
        }
        let mut regions = Vec::new();
        for (i, a) in family.arcs().iter().enumerate() {
            let alpha = a.half_angle();
            let rot = Rotation::new(a.center());
            let (s, c) = alpha.sin_cos();
            regions.push(Region {
                kind: RegionKind::IHalf { arc: i, side: Side::Lower },
                start: a.lower_end(),
                span: alpha,
                field: RegionField::Constant { value: rot.apply(Vec2::new(-s, -c)).into() },
            });
            regions.push(Region {
                kind: RegionKind::IHalf { arc: i, side: Side::Upper },
                start: a.center(),
                span: alpha,
                field: RegionField::Constant { value: rot.apply(Vec2::new(s, -c)).into() },
            });
        }
        for (j, g) in family.complementary().iter().enumerate() {
            regions.push(Region {
                kind: RegionKind::JSector { gap: j },
                start: g.start,
                span: g.length,
                field: RegionField::Radial,
            });
        }
        regions.sort_by(|a, b| a.start.total_cmp(&b.start));

        let mut interfaces = Vec::new();
        let m = regions.len();
        if m > 1 {
            for i in 0..m {
                let next = (i + 1) % m;
                let kind = match (regions[i].kind, regions[next].kind) {
                    (RegionKind::IHalf { arc: a, .. }, RegionKind::IHalf { arc: b, .. }) if a == b => {
                        InterfaceKind::Bisectrix { arc: a }
                    }
                    (RegionKind::IHalf { arc: a, .. }, RegionKind::IHalf { arc: b, .. }) => {
                        InterfaceKind::SharedEndpoint { cw_arc: a, ccw_arc: b }
                    }
                    (RegionKind::IHalf { arc, .. }, RegionKind::JSector { gap })
                    | (RegionKind::JSector { gap }, RegionKind::IHalf { arc, .. }) => {
                        InterfaceKind::ArcBoundary { arc, gap }
                    }
                    _ => InterfaceKind::Other,
                };
                interfaces.push(Interface {
                    angle: regions[next].start,
                    cw_region: i,
                    ccw_region: next,
                    kind,
                });
            }
        }
        Ok(Self { regions, interfaces })
    }

    /// Index of the region containing direction `v`; on an interface ray the
    /// region with the smaller index wins.
    pub fn region_at(&self, v: Vec2) -> usize {
        if self.regions.len() == 1 {
            return 0;
        }
        let theta = normalize_angle(v.angle());
        let mut best = None;
        for (i, r) in self.regions.iter().enumerate() {
            let d = r.offset(theta);
            if d <= r.span + ANGLE_TOL || d >= TAU - ANGLE_TOL {
                best = Some(i);
                break;
            }
        }
        best.expect("regions cover the circle")
    }

    pub fn interface_angles(&self) -> Vec<f64> {
        self.interfaces.iter().map(|i| i.angle).collect()
    }
}

/// Horizontal, `t`-invariant unit vector field assembled from region fields.
#[derive(Clone, Debug, Serialize)]
pub struct CalibrationField {
    decomposition: SectorDecomposition,
}

impl CalibrationField {
    pub fn build(cone: &ConeSurface) -> Result<Self> {
        Ok(Self { decomposition: SectorDecomposition::new(cone)? })
    }

    pub fn from_decomposition(decomposition: SectorDecomposition) -> Self {
        Self { decomposition }
    }

    pub fn decomposition(&self) -> &SectorDecomposition {
        &self.decomposition
    }

    pub fn decomposition_mut(&mut self) -> &mut SectorDecomposition {
        &mut self.decomposition
    }

    pub fn at(&self, v: Vec2) -> HVector {
        let r = self.decomposition.region_at(v);
        self.decomposition.regions[r].field.at(v)
    }

    /// The field at a point of the group; `t` is ignored.
    pub fn at_point(&self, p: HPoint) -> HVector {
        self.at(p.planar())
    }
}

/// Sampling parameters for the certificate checks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AuditOptions {
    /// Sample points are drawn with `|v|` up to this radius.
    pub radius: f64,
    pub samples_per_region: usize,
    pub fd_step: f64,
    pub fd_tol: f64,
    pub flux_samples: usize,
    pub flux_tol: f64,
    pub normal_samples: usize,
    pub normal_tol: f64,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            radius: 4.0,
            samples_per_region: 200,
            fd_step: 1e-5,
            fd_tol: 1e-8,
            flux_samples: 100,
            flux_tol: 1e-12,
            normal_samples: 2000,
            normal_tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionDivergence {
    pub region: usize,
    pub kind: RegionKind,
    pub field: RegionField,
    /// Exact divergence of the region's closed form.
    pub symbolic: f64,
    /// Largest `|X v1 + Y v2|` from the analytic Jacobian at the samples.
    pub analytic_max: f64,
    /// Largest central finite-difference divergence at the samples.
    pub fd_max: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub regions: Vec<RegionDivergence>,
    pub fd_max: f64,
    pub pass: bool,
}

/// Central differences of `X v1 + Y v2` at `p`.
fn fd_divergence(field: &RegionField, p: HPoint, h: f64) -> f64 {
    let shift = |dx: f64, dy: f64, dt: f64| field.coefficients(HPoint::new(p.x + dx, p.y + dy, p.t + dt));
    let (xp, xm) = (shift(h, 0.0, 0.0), shift(-h, 0.0, 0.0));
    let (yp, ym) = (shift(0.0, h, 0.0), shift(0.0, -h, 0.0));
    let (tp, tm) = (shift(0.0, 0.0, h), shift(0.0, 0.0, -h));
    let inv = 0.5 / h;
    let d1x = (xp.a - xm.a) * inv;
    let d1t = (tp.a - tm.a) * inv;
    let d2y = (yp.b - ym.b) * inv;
    let d2t = (tp.b - tm.b) * inv;
    (d1x + p.y * d1t) + (d2y - p.x * d2t)
}

/// Random point strictly inside `region`, with radius in `[radius/8, radius]`.
fn sample_in_region(rng: &mut ChaCha8Rng, region: &Region, radius: f64) -> HPoint {
    let margin = (region.span * 0.25).min(1e-3);
    let theta = region.start + rng.gen_range(margin..region.span - margin);
    let r = rng.gen_range(radius / 8.0..radius);
    let t = rng.gen_range(-radius..radius);
    let v = Vec2::from_polar(r, theta);
    HPoint::new(v.x, v.y, t)
}

pub fn check_piecewise_divergence(field: &CalibrationField, opts: &AuditOptions) -> DivergenceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let regions: Vec<RegionDivergence> = field
        .decomposition
        .regions
        .iter()
        .enumerate()
        .map(|(i, region)| {
            let mut analytic_max: f64 = 0.0;
            let mut fd_max: f64 = 0.0;
            for _ in 0..opts.samples_per_region {
                let p = sample_in_region(&mut rng, region, opts.radius);
                analytic_max = analytic_max.max(divergence_at(&region.field, p).abs());
                fd_max = fd_max.max(fd_divergence(&region.field, p, opts.fd_step).abs());
            }
            let symbolic = region.field.symbolic_divergence();
            RegionDivergence {
                region: i,
                kind: region.kind,
                field: region.field,
                symbolic,
                analytic_max,
                fd_max,
                pass: symbolic == 0.0 && fd_max < opts.fd_tol,
            }
        })
        .collect();
    let fd_max = regions.iter().map(|r| r.fd_max).fold(0.0, f64::max);
    let pass = regions.iter().all(|r| r.pass);
    DivergenceReport { regions, fd_max, pass }
}

#[derive(Clone, Debug, Serialize)]
pub struct InterfaceFlux {
    pub angle: f64,
    pub kind: InterfaceKind,
    pub cw_region: usize,
    pub ccw_region: usize,
    /// Largest `|<V_cw, n_cw> + <V_ccw, n_ccw>|` along the ray.
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FluxReport {
    pub interfaces: Vec<InterfaceFlux>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Normal flux balance across every interface ray, sampled at
/// `flux_samples` radii up to `radius`.
pub fn check_interface_flux(field: &CalibrationField, opts: &AuditOptions) -> FluxReport {
    let d = &field.decomposition;
    let n = opts.flux_samples.max(1);
    let interfaces: Vec<InterfaceFlux> = d
        .interfaces
        .iter()
        .map(|iface| {
            let (cw, ccw) = (&d.regions[iface.cw_region], &d.regions[iface.ccw_region]);
            let (ncw, nccw) = (iface.cw_normal(), iface.ccw_normal());
            let max_residual = (1..=n)
                .map(|i| {
                    let p = Vec2::from_polar(opts.radius * i as f64 / n as f64, iface.angle);
                    let sum = cw.field.at(p).as_vec2().dot(ncw) + ccw.field.at(p).as_vec2().dot(nccw);
                    sum.abs()
                })
                .fold(0.0, f64::max);
            InterfaceFlux {
                angle: iface.angle,
                kind: iface.kind,
                cw_region: iface.cw_region,
                ccw_region: iface.ccw_region,
                max_residual,
            }
        })
        .collect();
    let max_residual = interfaces.iter().map(|i| i.max_residual).fold(0.0, f64::max);
    FluxReport { interfaces, max_residual, pass: max_residual < opts.flux_tol }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityCertificate {
    /// Largest distance between the field and the upward unit horizontal
    /// normal `-N/|N|` of the graph at random regular points.
    pub normal_deviation: f64,
    pub normal_pass: bool,
    pub divergence: DivergenceReport,
    pub flux: FluxReport,
    pub pass: bool,
}

/// Bundle the normal agreement, piecewise divergence and interface flux
/// checks for the calibration of `cone`.
pub fn verify_minimality_certificate(cone: &ConeSurface, opts: &AuditOptions) -> Result<MinimalityCertificate> {
    let field = CalibrationField::build(cone)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9);
    let angles = field.decomposition.interface_angles();
    let mut normal_deviation: f64 = 0.0;
    let mut taken = 0;
    while taken < opts.normal_samples {
        let theta = rng.gen_range(0.0..TAU);
        if angles.iter().any(|&a| crate::geom::signed_offset(theta, a).abs() < 1e-9) {
            continue;
        }
        let v = Vec2::from_polar(rng.gen_range(1e-3..opts.radius), theta);
        let n = cone.characteristic_vector(v).any();
        let normal = -n.normalized();
        normal_deviation = normal_deviation.max((field.at(v).as_vec2() - normal).norm());
        taken += 1;
    }
    let divergence = check_piecewise_divergence(&field, opts);
    let flux = check_interface_flux(&field, opts);
    let normal_pass = normal_deviation < opts.normal_tol;
    let pass = normal_pass && divergence.pass && flux.pass;
    Ok(MinimalityCertificate { normal_deviation, normal_pass, divergence, flux, pass })
}

/// Smooth compactly supported test function `exp(1 - 1/(1 - s^2))`,
/// `s = |v - center| / radius`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TestFunction {
    pub center: Vec2,
    pub radius: f64,
}

impl TestFunction {
    pub fn value(&self, v: Vec2) -> f64 {
        let s2 = (v - self.center).dot(v - self.center) / (self.radius * self.radius);
        if s2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s2)).exp()
        }
    }

    pub fn gradient(&self, v: Vec2) -> Vec2 {
        let d = v - self.center;
        let r2 = self.radius * self.radius;
        let s2 = d.dot(d) / r2;
        if s2 >= 1.0 {
            return Vec2::ZERO;
        }
        let q = 1.0 - s2;
        // d/dv exp(1 - 1/q) = exp(1 - 1/q) * (-1/q^2) * (2 d / r2)
        d * (-(1.0 - 1.0 / q).exp() * 2.0 / (q * q * r2))
    }
}

/// `integral <grad phi, V> dx dy` over `[-half_width, half_width]^2` by the
/// 2x2 Gauss rule on `n x n` cells. Cells whose corners fall in different
/// regions, or that hold the origin, are split into quarters recursively, up
/// to `levels` times. Zero up to quadrature error for a field with vanishing
/// distributional divergence.
pub fn distributional_divergence(
    field: &CalibrationField,
    phi: &TestFunction,
    half_width: f64,
    n: usize,
    levels: usize,
) -> f64 {
    use rayon::prelude::*;
    let h = 2.0 * half_width / n as f64;
    let d = &field.decomposition;
    let integrand = |v: Vec2| {
        let g = phi.gradient(v);
        if g.is_zero() {
            0.0
        } else {
            g.dot(field.at(v).as_vec2())
        }
    };
    fn cell(
        d: &SectorDecomposition,
        f: &dyn Fn(Vec2) -> f64,
        x0: f64,
        y0: f64,
        h: f64,
        levels: usize,
    ) -> f64 {
        let corners = [Vec2::new(x0, y0), Vec2::new(x0 + h, y0), Vec2::new(x0, y0 + h), Vec2::new(x0 + h, y0 + h)];
        let straddles = levels > 0
            && d.regions.len() > 1
            && ((x0 <= 0.0 && x0 + h >= 0.0 && y0 <= 0.0 && y0 + h >= 0.0) || {
                let first = d.region_at(corners[0]);
                corners[1..].iter().any(|&c| d.region_at(c) != first)
            });
        if straddles {
            let k = 0.5 * h;
            cell(d, f, x0, y0, k, levels - 1)
                + cell(d, f, x0 + k, y0, k, levels - 1)
                + cell(d, f, x0, y0 + k, k, levels - 1)
                + cell(d, f, x0 + k, y0 + k, k, levels - 1)
        } else {
            // 2x2 Gauss-Legendre
            let o = 0.5 * h / 3f64.sqrt();
            let (cx, cy) = (x0 + 0.5 * h, y0 + 0.5 * h);
            (f(Vec2::new(cx - o, cy - o)) + f(Vec2::new(cx + o, cy - o)) + f(Vec2::new(cx - o, cy + o)) + f(Vec2::new(cx + o, cy + o)))
                * (0.25 * h * h)
        }
    }
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x0 = -half_width + i as f64 * h;
            let mut acc = 0.0;
            for j in 0..n {
                let y0 = -half_width + j as f64 * h;
                let mid = Vec2::new(x0 + 0.5 * h, y0 + 0.5 * h);
                // skip cells outside the support
                if (mid - phi.center).norm() > phi.radius + h {
                    continue;
                }
                acc += cell(d, &integrand, x0, y0, h, levels);
            }
            acc
        })
        .collect();
    rows.iter().sum()
}
