//! Sub-Riemannian perimeter of t-graphs and perturbation experiments.
//!
//! For the subgraph `{t <= u(x, y)}` the perimeter measure over a planar
//! domain is `|(u_x - y, u_y + x)| dx dy`.

use std::f64::consts::TAU;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arcs::ArcFamily;
use crate::cone::ConeSurface;
use crate::error::{Error, Result};
use crate::geom::{normalize_angle, Vec2};

/// A planar function with a gradient defined almost everywhere.
pub trait GraphFunction: Sync {
    fn value(&self, v: Vec2) -> f64;
    fn gradient(&self, v: Vec2) -> Vec2;
    /// Directions of rays across which the gradient may jump.
    fn crease_angles(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl GraphFunction for ConeSurface {
    fn value(&self, v: Vec2) -> f64 {
        self.evaluate(v)
    }

    fn gradient(&self, v: Vec2) -> Vec2 {
        ConeSurface::gradient(self, v).any()
    }

    fn crease_angles(&self) -> Vec<f64> {
        ConeSurface::crease_angles(self)
    }
}

impl<G: GraphFunction + ?Sized> GraphFunction for &G {
    fn value(&self, v: Vec2) -> f64 {
        (**self).value(v)
    }

    fn gradient(&self, v: Vec2) -> Vec2 {
        (**self).gradient(v)
    }

    fn crease_angles(&self) -> Vec<f64> {
        (**self).crease_angles()
    }
}

/// Closed-form graph from a value and a gradient closure.
pub struct AnalyticGraph<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> AnalyticGraph<F, G>
where
    F: Fn(Vec2) -> f64 + Sync,
    G: Fn(Vec2) -> Vec2 + Sync,
{
    pub fn new(value: F, gradient: G) -> Self {
        Self { value, gradient }
    }
}

impl<F, G> GraphFunction for AnalyticGraph<F, G>
where
    F: Fn(Vec2) -> f64 + Sync,
    G: Fn(Vec2) -> Vec2 + Sync,
{
    fn value(&self, v: Vec2) -> f64 {
        (self.value)(v)
    }

    fn gradient(&self, v: Vec2) -> Vec2 {
        (self.gradient)(v)
    }
}

/// `u = 0`.
pub fn plane() -> impl GraphFunction {
    AnalyticGraph::new(|_| 0.0, |_| Vec2::ZERO)
}

/// Perimeter density `|(u_x - y, u_y + x)|` from a gradient.
pub fn density(v: Vec2, grad: Vec2) -> f64 {
    (grad.x - v.y).hypot(grad.y + v.x)
}

/// Quartic bump `amplitude * (1 - s^2)^2`, `s = |v - center| / radius`,
/// zero for `s >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub center: Vec2,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn value(&self, v: Vec2) -> f64 {
        let d = v - self.center;
        let s2 = d.dot(d) / (self.radius * self.radius);
        if s2 >= 1.0 {
            0.0
        } else {
            let q = 1.0 - s2;
            self.amplitude * q * q
        }
    }

    pub fn gradient(&self, v: Vec2) -> Vec2 {
        let d = v - self.center;
        let r2 = self.radius * self.radius;
        let s2 = d.dot(d) / r2;
        if s2 >= 1.0 {
            Vec2::ZERO
        } else {
            d * (-4.0 * self.amplitude * (1.0 - s2) / r2)
        }
    }

    pub fn contains(&self, v: Vec2) -> bool {
        (v - self.center).norm() < self.radius
    }

    /// Random bump with support inside `dom`: radius log-uniform in
    /// `[0.05, 0.5]` times the domain scale, center uniform over the domain
    /// shrunk by the radius, amplitude uniform in `[-0.5, 0.5]`.
    pub fn random<R: Rng>(rng: &mut R, dom: &Domain2D) -> Self {
        let scale = dom.scale();
        let radius = scale * rng.gen_range(0.05f64.ln()..0.5f64.ln()).exp();
        let center = match dom.shape {
            Shape::Disk { center, radius: big } => {
                let rho = (big - radius) * rng.gen_range(0.0f64..1.0).sqrt();
                center + Vec2::from_polar(rho, rng.gen_range(0.0..TAU))
            }
            Shape::Rectangle { min, max } => Vec2::new(
                rng.gen_range(min.x + radius..max.x - radius),
                rng.gen_range(min.y + radius..max.y - radius),
            ),
        };
        Self { center, radius, amplitude: rng.gen_range(-0.5..0.5) }
    }
}

/// `base + eps * bump`.
pub struct Perturbed<'a, G: ?Sized> {
    pub base: &'a G,
    pub bump: Bump,
    pub eps: f64,
}

impl<G: GraphFunction + ?Sized> GraphFunction for Perturbed<'_, G> {
    fn value(&self, v: Vec2) -> f64 {
        self.base.value(v) + self.eps * self.bump.value(v)
    }

    fn gradient(&self, v: Vec2) -> Vec2 {
        self.base.gradient(v) + self.bump.gradient(v) * self.eps
    }

    fn crease_angles(&self) -> Vec<f64> {
        self.base.crease_angles()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk { center: Vec2, radius: f64 },
    Rectangle { min: Vec2, max: Vec2 },
}

/// Planar integration domain with grid resolution `n` (cells across).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Domain2D {
    pub shape: Shape,
    pub n: usize,
}

impl Domain2D {
    pub const MIN_RESOLUTION: usize = 16;

    pub fn new(shape: Shape, n: usize) -> Result<Self> {
        if n < Self::MIN_RESOLUTION {
            return Err(Error::BadDomain(format!("grid resolution {n} is below {}", Self::MIN_RESOLUTION)));
        }
        let ok = match shape {
            Shape::Disk { center, radius } => center.is_finite() && radius.is_finite() && radius > 0.0,
            Shape::Rectangle { min, max } => {
                min.is_finite() && max.is_finite() && max.x > min.x && max.y > min.y
            }
        };
        if !ok {
            return Err(Error::BadDomain(format!("{shape:?} has no interior")));
        }
        Ok(Self { shape, n })
    }

    /// Disk of radius `r` centered at the origin.
    pub fn disk(radius: f64, n: usize) -> Result<Self> {
        Self::new(Shape::Disk { center: Vec2::ZERO, radius }, n)
    }

    pub fn with_resolution(&self, n: usize) -> Result<Self> {
        Self::new(self.shape, n)
    }

    /// Disk radius, or half the shorter side of a rectangle.
    pub fn scale(&self) -> f64 {
        match self.shape {
            Shape::Disk { radius, .. } => radius,
            Shape::Rectangle { min, max } => 0.5 * (max.x - min.x).min(max.y - min.y),
        }
    }

    pub fn contains(&self, v: Vec2) -> bool {
        match self.shape {
            Shape::Disk { center, radius } => (v - center).norm() <= radius,
            Shape::Rectangle { min, max } => v.x >= min.x && v.x <= max.x && v.y >= min.y && v.y <= max.y,
        }
    }

    fn bounds(&self) -> (Vec2, Vec2) {
        match self.shape {
            Shape::Disk { center, radius } => {
                (center - Vec2::new(radius, radius), center + Vec2::new(radius, radius))
            }
            Shape::Rectangle { min, max } => (min, max),
        }
    }

    fn centered_disk(&self) -> Option<f64> {
        match self.shape {
            Shape::Disk { center, radius } if center.is_zero() => Some(radius),
            _ => None,
        }
    }

    /// Cell midpoints of the `n x n` grid over the bounding box that lie in
    /// the domain.
    pub fn sample_points(&self) -> Vec<Vec2> {
        let (lo, hi) = self.bounds();
        let (hx, hy) = ((hi.x - lo.x) / self.n as f64, (hi.y - lo.y) / self.n as f64);
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let v = Vec2::new(lo.x + (i as f64 + 0.5) * hx, lo.y + (j as f64 + 0.5) * hy);
                if self.contains(v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// `m` points evenly spaced along the boundary.
    pub fn boundary_points(&self, m: usize) -> Vec<Vec2> {
        match self.shape {
            Shape::Disk { center, radius } => (0..m)
                .map(|k| center + Vec2::from_polar(radius, TAU * k as f64 / m as f64))
                .collect(),
            Shape::Rectangle { min, max } => {
                let corners = [min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)];
                let per = (m / 4).max(1);
                (0..4)
                    .flat_map(|s| {
                        let (a, b) = (corners[s], corners[(s + 1) % 4]);
                        (0..per).map(move |k| a + (b - a) * (k as f64 / per as f64))
                    })
                    .collect()
            }
        }
    }
}

impl FromStr for Domain2D {
    type Err = Error;

    /// `disk:R`, `disk:R@cx,cy` or `rect:x0,y0,x1,y1`, with optional
    /// `/n` for the resolution (default 256).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadDomain(format!("cannot parse domain {s:?}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let (body, n) = match s.split_once('/') {
            Some((b, n)) => (b, n.trim().parse::<usize>().map_err(|_| bad())?),
            None => (s, 256),
        };
        let (kind, args) = body.split_once(':').ok_or_else(bad)?;
        let shape = match kind.trim() {
            "disk" => {
                let (r, c) = match args.split_once('@') {
                    Some((r, c)) => {
                        let (cx, cy) = c.split_once(',').ok_or_else(bad)?;
                        (num(r)?, Vec2::new(num(cx)?, num(cy)?))
                    }
                    None => (num(args)?, Vec2::ZERO),
                };
                Shape::Disk { center: c, radius: r }
            }
            "rect" => {
                let v: Vec<f64> = args.split(',').map(num).collect::<Result<_>>()?;
                if v.len() != 4 {
                    return Err(bad());
                }
                Shape::Rectangle { min: Vec2::new(v[0], v[1]), max: Vec2::new(v[2], v[3]) }
            }
            _ => return Err(bad()),
        };
        Domain2D::new(shape, n)
    }
}

/// Cells across each 4x4 subsampled cell.
const SUBSAMPLE: usize = 4;

/// Angular cell edges aligned to `creases`, about `total` cells in all.
fn angular_edges(creases: &[f64], total: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = creases.iter().map(|&a| normalize_angle(a)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if cuts.is_empty() {
        return (0..=total).map(|k| TAU * k as f64 / total as f64).collect();
    }
    let mut edges = Vec::with_capacity(total + cuts.len() + 1);
    for (i, &a) in cuts.iter().enumerate() {
        let b = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + TAU };
        let m = ((b - a) / TAU * total as f64).round().max(1.0) as usize;
        for k in 0..m {
            edges.push(a + (b - a) * k as f64 / m as f64);
        }
    }
    edges.push(cuts[0] + TAU);
    edges
}

/// Which angular piece between consecutive creases holds `theta`.
fn crease_piece(sorted: &[f64], theta: f64) -> usize {
    sorted.partition_point(|&a| a <= theta)
}

/// Midpoint quadrature of `f` over `dom`.
///
/// A disk centered at the origin uses a polar grid of `n/2` rings and `2n`
/// angular cells with cell edges on every crease ray. Other domains use an
/// `n x n` Cartesian grid; cells cut by the boundary or by a crease ray are
/// subsampled 4x4. Rows are summed in a fixed order, so the result does not
/// depend on the thread count.
pub fn integrate<F>(dom: &Domain2D, creases: &[f64], f: F) -> f64
where
    F: Fn(Vec2) -> f64 + Sync,
{
    if let Some(radius) = dom.centered_disk() {
        let rings = (dom.n / 2).max(1);
        let edges = angular_edges(creases, 2 * dom.n);
        let dr = radius / rings as f64;
        let rows: Vec<f64> = (0..rings)
            .into_par_iter()
            .map(|i| {
                let r = (i as f64 + 0.5) * dr;
                let mut acc = 0.0;
                for w in edges.windows(2) {
                    let dth = w[1] - w[0];
                    acc += f(Vec2::from_polar(r, 0.5 * (w[0] + w[1]))) * dth;
                }
                acc * r * dr
            })
            .collect();
        return rows.iter().sum();
    }

    let (lo, hi) = dom.bounds();
    let n = dom.n;
    let (hx, hy) = ((hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64);
    let mut sorted: Vec<f64> = creases.iter().map(|&a| normalize_angle(a)).collect();
    sorted.sort_by(f64::total_cmp);
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x0 = lo.x + i as f64 * hx;
            let mut acc = 0.0;
            for j in 0..n {
                let y0 = lo.y + j as f64 * hy;
                let corners = [
                    Vec2::new(x0, y0),
                    Vec2::new(x0 + hx, y0),
                    Vec2::new(x0, y0 + hy),
                    Vec2::new(x0 + hx, y0 + hy),
                ];
                let inside = corners.iter().filter(|&&c| dom.contains(c)).count();
                if inside == 0 && !dom.contains(Vec2::new(x0 + 0.5 * hx, y0 + 0.5 * hy)) {
                    continue;
                }
                let cut_by_crease = !sorted.is_empty() && {
                    let has_origin = x0 <= 0.0 && x0 + hx >= 0.0 && y0 <= 0.0 && y0 + hy >= 0.0;
                    let p0 = crease_piece(&sorted, normalize_angle(corners[0].angle()));
                    has_origin
                        || corners[1..]
                            .iter()
                            .any(|c| crease_piece(&sorted, normalize_angle(c.angle())) != p0)
                };
                if inside == 4 && !cut_by_crease {
                    acc += f(Vec2::new(x0 + 0.5 * hx, y0 + 0.5 * hy)) * hx * hy;
                } else {
                    let (sx, sy) = (hx / SUBSAMPLE as f64, hy / SUBSAMPLE as f64);
                    for a in 0..SUBSAMPLE {
                        for b in 0..SUBSAMPLE {
                            let v = Vec2::new(x0 + (a as f64 + 0.5) * sx, y0 + (b as f64 + 0.5) * sy);
                            if dom.contains(v) {
                                acc += f(v) * sx * sy;
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    rows.iter().sum()
}

/// Perimeter of the subgraph of `u` over the cylinder above `dom`.
pub fn perimeter_of_graph<G: GraphFunction + ?Sized>(u: &G, dom: &Domain2D) -> f64 {
    integrate(dom, &u.crease_angles(), |v| density(v, u.gradient(v)))
}

/// `P(u + eps*bump) - P(u)` on the quadrature grid of `dom`. Cells outside
/// the bump contribute exactly zero and are skipped.
pub fn perimeter_delta<G: GraphFunction + ?Sized>(u: &G, bump: &Bump, eps: f64, dom: &Domain2D) -> f64 {
    integrate(dom, &u.crease_angles(), |v| {
        if !bump.contains(v) {
            return 0.0;
        }
        let g = u.gradient(v);
        density(v, g + bump.gradient(v) * eps) - density(v, g)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub bump: Bump,
    /// `(eps, delta)` for each entry of the eps grid.
    pub deltas: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    pub n: usize,
    pub tol: f64,
    pub min_delta: f64,
    /// Trial index and eps attaining `min_delta`.
    pub worst: Option<(usize, f64)>,
    pub trials: Vec<TrialResult>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct PerturbOptions {
    pub trials: usize,
    pub eps: Vec<f64>,
    pub seed: u64,
    /// Fixed tolerance; calibrated on the plane when `None`.
    pub tol: Option<f64>,
}

impl Default for PerturbOptions {
    fn default() -> Self {
        Self { trials: 100, eps: vec![0.2, -0.2, 0.1, -0.1, 0.05, -0.05], seed: 7, tol: None }
    }
}

/// Parse `0.2,0.1` into a symmetric grid `0.2,-0.2,0.1,-0.1`.
pub fn symmetric_eps(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for &e in values {
        for s in [e.abs(), -e.abs()] {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

/// Seeded bumps for `trials` trials; identical for identical seeds.
pub fn random_bumps(dom: &Domain2D, trials: usize, seed: u64) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| Bump::random(&mut rng, dom)).collect()
}

/// Quadrature noise floor for `bumps` on `dom`: twice the largest change of
/// the plane's perimeter deltas when the grid is doubled, and at least 1e-6.
pub fn calibrate_tolerance(dom: &Domain2D, bumps: &[Bump], eps: &[f64]) -> f64 {
    let fine = dom.with_resolution(dom.n * 2).expect("doubling keeps the domain valid");
    let p = plane();
    let worst = bumps
        .par_iter()
        .map(|b| {
            eps.iter()
                .map(|&e| (perimeter_delta(&p, b, e, dom) - perimeter_delta(&p, b, e, &fine)).abs())
                .fold(0.0, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    (2.0 * worst).max(1e-6)
}

/// Random bump perturbations of `u`; passes iff no perturbation lowers the
/// perimeter by more than the tolerance.
pub fn perturbation_test<G: GraphFunction + ?Sized>(u: &G, dom: &Domain2D, opts: &PerturbOptions) -> PerturbationReport {
    let bumps = random_bumps(dom, opts.trials, opts.seed);
    let tol = opts.tol.unwrap_or_else(|| calibrate_tolerance(dom, &bumps, &opts.eps));
    let trials: Vec<TrialResult> = bumps
        .par_iter()
        .enumerate()
        .map(|(trial, bump)| TrialResult {
            trial,
            bump: *bump,
            deltas: opts.eps.iter().map(|&e| (e, perimeter_delta(u, bump, e, dom))).collect(),
        })
        .collect();
    let mut min_delta = f64::INFINITY;
    let mut worst = None;
    for t in &trials {
        for &(e, d) in &t.deltas {
            if d < min_delta {
                min_delta = d;
                worst = Some((t.trial, e));
            }
        }
    }
    PerturbationReport { n: dom.n, tol, min_delta, worst, pass: min_delta >= -tol, trials }
}

/// Least-squares slope of `log |delta|` against `log |eps|`.
pub fn fit_exponent(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(e, d)| *e != 0.0 && *d != 0.0)
        .map(|(e, d)| (e.abs().ln(), d.abs().ln()))
        .collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationStep {
    pub from: usize,
    pub to: usize,
    /// Sup over the domain of `|u_from - u_to|`.
    pub sup_diff: f64,
    /// `R^2 tan(alpha)` for the first added tail arc, `R` the largest `|v|`.
    pub bound: f64,
    /// Volume of the symmetric difference of the two subgraphs over the domain.
    pub l1_subgraph: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationReport {
    pub ks: Vec<usize>,
    pub steps: Vec<TruncationStep>,
    pub monotone: bool,
    pub pass: bool,
}

/// Compare truncations keeping the first `k` tail arcs, for consecutive
/// entries of `ks`.
pub fn truncation_convergence(family: &ArcFamily, dom: &Domain2D, ks: &[usize]) -> Result<TruncationReport> {
    let tail = *family.tail().ok_or(Error::NoTail)?;
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut points = dom.sample_points();
    points.extend(dom.boundary_points(16 * dom.n));
    // dense angular samples at the farthest radius, where |u| peaks
    let reach = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let cones: Vec<ConeSurface> = ks.iter().map(|&k| ConeSurface::new(family.truncate(k))).collect();
    let mut steps = Vec::new();
    for w in 0..ks.len().saturating_sub(1) {
        let (a, b) = (&cones[w], &cones[w + 1]);
        let mut samples = points.clone();
        for m in ks[w]..ks[w + 1] {
            let arc = tail.arc(m);
            let lo = arc.lower_end();
            samples.extend((0..=256).map(|s| Vec2::from_polar(reach, lo + arc.length() * s as f64 / 256.0)));
        }
        let sup_diff = samples
            .par_iter()
            .map(|&v| if dom.contains(v) || v.norm() <= reach { (a.evaluate(v) - b.evaluate(v)).abs() } else { 0.0 })
            .reduce(|| 0.0, f64::max);
        let bound = reach * reach * tail.arc(ks[w]).half_angle().tan();
        let l1_subgraph = integrate(dom, &[], |v| (a.evaluate(v) - b.evaluate(v)).abs());
        steps.push(TruncationStep {
            from: ks[w],
            to: ks[w + 1],
            sup_diff,
            bound,
            l1_subgraph,
            within_bound: sup_diff <= bound,
        });
    }
    let monotone = steps.windows(2).all(|s| s[1].sup_diff < s[0].sup_diff);
    let pass = monotone && steps.iter().all(|s| s.within_bound);
    Ok(TruncationReport { ks, steps, monotone, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcs::{Arc, GeometricTail};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn half_circles() -> ConeSurface {
        ConeSurface::new(
            ArcFamily::validate(vec![Arc::new(0.0, FRAC_PI_2).unwrap(), Arc::new(PI, FRAC_PI_2).unwrap()]).unwrap(),
        )
    }

    #[test]
    fn plane_over_unit_disk() {
        let p = perimeter_of_graph(&plane(), &Domain2D::disk(1.0, 512).unwrap());
        assert!((p - TAU / 3.0).abs() < 1e-3, "{p}");
    }

    #[test]
    fn plane_over_radius_two() {
        let p = perimeter_of_graph(&plane(), &Domain2D::disk(2.0, 512).unwrap());
        assert!((p - 16.0 * PI / 3.0).abs() < 4e-3, "{p}");
    }

    #[test]
    fn saddle_over_unit_disk() {
        let p = perimeter_of_graph(&half_circles(), &Domain2D::disk(1.0, 512).unwrap());
        assert!((p - 8.0 / 3.0).abs() < 1e-3, "{p}");
        let saddle = AnalyticGraph::new(|v: Vec2| -v.x * v.y, |v: Vec2| Vec2::new(-v.y, -v.x));
        let q = perimeter_of_graph(&saddle, &Domain2D::disk(1.0, 512).unwrap());
        assert!((q - 8.0 / 3.0).abs() < 1e-3, "{q}");
    }

    #[test]
    fn cartesian_path() {
        let off = Domain2D::new(Shape::Disk { center: Vec2::new(1e-9, 0.0), radius: 1.0 }, 512).unwrap();
        let p = perimeter_of_graph(&half_circles(), &off);
        assert!((p - 8.0 / 3.0).abs() < 2e-3, "{p}");
        // square [0,1]^2 for u = 0: integral of r
        let sq = Domain2D::new(Shape::Rectangle { min: Vec2::ZERO, max: Vec2::new(1.0, 1.0) }, 256).unwrap();
        let exact = (2f64.sqrt() + (1.0 + 2f64.sqrt()).ln()) / 3.0;
        assert!((perimeter_of_graph(&plane(), &sq) - exact).abs() < 1e-5);
    }

    #[test]
    fn zero_eps_is_zero() {
        let dom = Domain2D::disk(1.0, 64).unwrap();
        let b = Bump { center: Vec2::new(0.2, 0.1), radius: 0.3, amplitude: 0.4 };
        assert_eq!(perimeter_delta(&plane(), &b, 0.0, &dom), 0.0);
    }

    #[test]
    fn bump_gradient_and_support() {
        let b = Bump { center: Vec2::new(0.1, -0.3), radius: 0.4, amplitude: -0.3 };
        let v = Vec2::new(0.2, -0.1);
        let h = 1e-6;
        let gx = (b.value(v + Vec2::new(h, 0.0)) - b.value(v - Vec2::new(h, 0.0))) / (2.0 * h);
        let gy = (b.value(v + Vec2::new(0.0, h)) - b.value(v - Vec2::new(0.0, h))) / (2.0 * h);
        assert!((b.gradient(v) - Vec2::new(gx, gy)).norm() < 1e-8);
        let dom = Domain2D::disk(1.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let b = Bump::random(&mut rng, &dom);
            assert!(b.center.norm() + b.radius <= 1.0 + 1e-12);
            assert!(b.radius >= 0.05 - 1e-12 && b.radius <= 0.5 + 1e-12);
            assert!(b.amplitude.abs() <= 0.5);
        }
    }

    #[test]
    fn domain_parsing() {
        let d: Domain2D = "disk:1".parse().unwrap();
        assert_eq!(d, Domain2D::disk(1.0, 256).unwrap());
        let d: Domain2D = "disk:2@0.5,-1/64".parse().unwrap();
        assert_eq!(d.shape, Shape::Disk { center: Vec2::new(0.5, -1.0), radius: 2.0 });
        assert_eq!(d.n, 64);
        assert!("rect:0,0,1,1".parse::<Domain2D>().is_ok());
        assert!("rect:0,0,0,1".parse::<Domain2D>().is_err());
        assert!("disk:1/8".parse::<Domain2D>().is_err());
        assert!("ball:1".parse::<Domain2D>().is_err());
    }

    #[test]
    fn symmetric_grid() {
        assert_eq!(symmetric_eps(&[0.2, 0.1]), vec![0.2, -0.2, 0.1, -0.1]);
    }

    #[test]
    fn fit_exponent_exact() {
        let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&e| (e, 3.0 * e * e)).collect();
        assert!((fit_exponent(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_needs_tail() {
        let dom = Domain2D::disk(1.0, 32).unwrap();
        assert!(matches!(truncation_convergence(&ArcFamily::empty(), &dom, &[1, 2]), Err(Error::NoTail)));
    }

    #[test]
    fn truncation_bound_holds() {
        let tail = GeometricTail { accumulate_at: 0.0, first_center: 0.6, ratio: 0.5, first_half_angle: 0.2 };
        let family = ArcFamily::with_tail(vec![], Some(tail)).unwrap();
        let dom = Domain2D::disk(1.0, 64).unwrap();
        let r = truncation_convergence(&family, &dom, &[2, 4, 8, 16]).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.steps.len(), 3);
    }
}
