//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runtime limits assume an optimized test profile.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI, TAU};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hcone_core::arcs::{Arc, ArcFamily};
use hcone_core::calibrate::{verify_minimality_certificate, AuditOptions};
use hcone_core::cone::{classify, grad_u_alpha, u_alpha, SingularSet, SurfaceKind, SurfaceSpec};
use hcone_core::hgroup::{balayage_area, lift_curve, PlanarCurve};
use hcone_core::perimeter::{
    perimeter_of_graph, perturbation_test, plane, random_bumps, calibrate_tolerance, truncation_convergence,
    AnalyticGraph, Domain2D, PerturbOptions,
};
use hcone_core::{ConeSurface, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn fixture(name: &str) -> ConeSurface {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ConeSurface::new(ArcFamily::from_json_str(&text).expect("fixture parses"))
}

fn family(arcs: &[(f64, f64)]) -> ArcFamily {
    ArcFamily::validate(arcs.iter().map(|&(c, a)| Arc::new(c, a).unwrap()).collect()).unwrap()
}

/// Closures of `k` random arcs tile the circle.
fn random_covering(rng: &mut ChaCha8Rng, k: usize) -> ArcFamily {
    loop {
        let mut cuts: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
        cuts.sort_by(f64::total_cmp);
        let arcs: Vec<(f64, f64)> = (0..k)
            .map(|i| {
                let a = cuts[i];
                let b = if i + 1 < k { cuts[i + 1] } else { cuts[0] + TAU };
                (0.5 * (a + b), 0.5 * (b - a))
            })
            .collect();
        if arcs.iter().all(|&(_, h)| h > 0.02 && h < PI - 0.02) {
            return family(&arcs);
        }
    }
}

/// `k` random arcs leaving gaps.
fn random_gapped(rng: &mut ChaCha8Rng, k: usize) -> ArcFamily {
    let base = random_covering(rng, k.max(2));
    let arcs: Vec<(f64, f64)> = base
        .arcs()
        .iter()
        .take(k.max(1))
        .map(|a| (a.center(), a.half_angle() * rng.gen_range(0.3..0.9)))
        .collect();
    family(&arcs)
}

fn lifting() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut exact_mismatch = 0;
    let mut max_residual: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=19);
        let mut verts = vec![Vec2::ZERO];
        verts.extend((0..m).map(|_| Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))));
        let curve = PlanarCurve::new(verts.clone()).unwrap();
        let lift = lift_curve(&curve, 0.0);
        let area = balayage_area(&curve).unwrap();
        if lift.last().unwrap().t != -2.0 * area {
            exact_mismatch += 1;
        }
        for (w, p) in verts.windows(2).zip(lift.windows(2)) {
            let (a, b) = (w[0], w[1]);
            let dt = p[1].t - p[0].t;
            // t' = y x' - x y' along the segment, constant in the parameter
            let expected = a.y * (b.x - a.x) - a.x * (b.y - a.y);
            max_residual = max_residual.max((dt - expected).abs() / (1.0 + p[1].t.abs()));
        }
    }
    outcome(
        exact_mismatch == 0 && max_residual < 1e-13,
        format!("1000 polylines, {exact_mismatch} endpoint mismatches, max horizontality residual {max_residual:.1e}"),
    )
}

fn closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut worst_sided: f64 = 0.0;
    let alphas = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
    let mut count = 0;
    while count < 10_000 {
        let alpha = alphas[count % 4];
        let v = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let th = v.angle();
        if v.norm() < 0.1 || th.abs() < 1e-3 || (th.abs() - alpha).abs() < 1e-3 {
            continue;
        }
        let u = |p: Vec2| u_alpha(alpha, p).unwrap();
        let fd = Vec2::new(
            (u(v + Vec2::new(h, 0.0)) - u(v - Vec2::new(h, 0.0))) / (2.0 * h),
            (u(v + Vec2::new(0.0, h)) - u(v - Vec2::new(0.0, h))) / (2.0 * h),
        );
        worst = worst.max((grad_u_alpha(alpha, v).unwrap().any() - fd).norm());
        count += 1;
    }
    // one-sided limits on the bisectrix and both boundary rays
    for &alpha in &alphas {
        for ray in [0.0, alpha, -alpha] {
            for _ in 0..50 {
                let p = Vec2::from_polar(rng.gen_range(0.2..2.0), ray);
                let n = Vec2::polar(ray).perp();
                let u = |q: Vec2| u_alpha(alpha, q).unwrap();
                // second-order one-sided differences, exact on quadratics
                let plus = (-3.0 * u(p) + 4.0 * u(p + n * h) - u(p + n * (2.0 * h))) / (2.0 * h);
                let minus = (3.0 * u(p) - 4.0 * u(p - n * h) + u(p - n * (2.0 * h))) / (2.0 * h);
                let [ccw, cw] = grad_u_alpha(alpha, p).unwrap().sides();
                worst_sided = worst_sided.max((ccw.dot(n) - plus).abs()).max((cw.dot(n) - minus).abs());
            }
        }
    }
    outcome(
        worst < 1e-6 && worst_sided < 1e-6,
        format!("10^4 points: max FD gap {worst:.1e}; one-sided limits on 600 ray points: {worst_sided:.1e}"),
    )
}

fn homogeneity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    // 100 families x 100 points
    for i in 0..100 {
        let fam = if i % 2 == 0 { random_covering(&mut rng, 2 + i % 7) } else { random_gapped(&mut rng, 1 + i % 8) };
        let cone = ConeSurface::new(fam);
        for _ in 0..100 {
            let v = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let lambda = rng.gen_range(0.01..50.0);
            let lhs = cone.evaluate(v * lambda);
            let rhs = lambda * lambda * cone.evaluate(v);
            worst = worst.max((lhs - rhs).abs() / (lambda * lambda * v.dot(v)));
        }
    }
    // continuity across interface rays: gap shrinks linearly with the offset
    let cone = ConeSurface::new(random_gapped(&mut rng, 4));
    let mut linear = true;
    let mut smallest_gap: f64 = 0.0;
    for angle in cone.crease_angles() {
        let p = Vec2::polar(angle);
        let n = p.perp();
        let gaps: Vec<f64> = (1..=6)
            .map(|e| {
                let d = 10f64.powi(-e);
                ((cone.evaluate(p + n * d) - cone.evaluate(p - n * d)).abs(), d)
            })
            .map(|(g, d)| g / d)
            .collect();
        // gap / d stays bounded and settles as d -> 0
        let c = gaps[0].max(1.0);
        linear &= gaps.iter().all(|&r| r <= 2.0 * c);
        smallest_gap = smallest_gap.max(gaps[5] * 1e-6);
    }
    outcome(
        worst < 1e-12 && linear && smallest_gap < 1e-5,
        format!("max relative homogeneity defect {worst:.1e}; interface gap at 1e-6 offset {smallest_gap:.1e}"),
    )
}

fn c1_dichotomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut agree = 0;
    let mut covering = 0;
    for i in 0..50 {
        let k = 1 + i % 8;
        let fam = if i % 2 == 0 && k >= 2 {
            covering += 1;
            random_covering(&mut rng, k)
        } else {
            random_gapped(&mut rng, k)
        };
        let cone = ConeSurface::new(fam);
        let analytic = cone.is_c1().c1;
        let numeric = cone.probe_gradient_jumps(1.0, 1e-10).iter().all(|j| j.jump < 1e-8);
        if analytic == numeric {
            agree += 1;
        }
    }
    let tail = fixture("tail.json");
    let tail_c1 = tail.is_c1().c1;
    let osc = tail.oscillation_probe(1.0, 12, 64).unwrap();
    let pass = agree == 50 && !tail_c1 && osc.min_amplitude >= 1.0 && osc.sup_gradient <= osc.gradient_bound * (1.0 + 1e-12);
    outcome(
        pass,
        format!(
            "{agree}/50 agree ({covering} covering); tail: c1={tail_c1}, min amplitude {:.3}, sup|grad| {:.15} vs bound {:.3}",
            osc.min_amplitude, osc.sup_gradient, osc.gradient_bound
        ),
    )
}

fn calibration() -> Outcome {
    let opts = AuditOptions::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for name in ["empty.json", "one_arc.json", "halfcircles.json", "three_arcs.json", "covering.json"] {
        let cert = verify_minimality_certificate(&fixture(name), &opts).unwrap();
        let symbolic_zero = cert.divergence.regions.iter().all(|r| r.symbolic == 0.0);
        let ok = cert.pass
            && symbolic_zero
            && cert.divergence.fd_max < 1e-8
            && cert.flux.max_residual < 1e-12
            && cert.normal_deviation < 1e-10;
        pass &= ok;
        lines.push(format!(
            "{name}: fd {:.1e}, flux {:.1e}, normal {:.1e}",
            cert.divergence.fd_max, cert.flux.max_residual, cert.normal_deviation
        ));
    }
    outcome(pass, lines.join("; "))
}

fn quadrature() -> Outcome {
    let exact = TAU / 3.0;
    let ns = [64, 128, 256, 512, 1024];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| (perimeter_of_graph(&plane(), &Domain2D::disk(1.0, n).unwrap()) - exact).abs())
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let e512 = errs[3];
    let saddle = (perimeter_of_graph(&fixture("halfcircles.json"), &Domain2D::disk(1.0, 512).unwrap()) - 8.0 / 3.0).abs();
    outcome(
        e512 < 1e-3 && min_order >= 1.0 && saddle < 1e-3,
        format!("plane error at n=512 {e512:.1e}, min observed order {min_order:.2}; saddle error {saddle:.1e}"),
    )
}

fn perturbation() -> Outcome {
    let dom = Domain2D::disk(1.0, 256).unwrap();
    let base = PerturbOptions::default();
    let bumps = random_bumps(&dom, base.trials, base.seed);
    let tol = calibrate_tolerance(&dom, &bumps, &base.eps);
    let opts = PerturbOptions { tol: Some(tol), ..base };
    let mut pass = true;
    let mut lines = vec![format!("tol {tol:.1e}")];
    for name in ["halfcircles.json", "three_arcs.json"] {
        let r = perturbation_test(&fixture(name), &dom, &opts);
        pass &= r.pass;
        lines.push(format!("{name}: min delta {:.2e}", r.min_delta));
    }
    let control = AnalyticGraph::new(|v: Vec2| v.x * v.x, |v: Vec2| Vec2::new(2.0 * v.x, 0.0));
    let r = perturbation_test(&control, &dom, &opts);
    let detected = r.min_delta < -10.0 * tol;
    pass &= detected;
    lines.push(format!("u=x^2 control: min delta {:.2e}", r.min_delta));
    outcome(pass, lines.join("; "))
}

fn classification() -> Outcome {
    let mut pass = true;
    let v = classify(SurfaceSpec::VerticalPlane { normal: Vec2::new(0.0, 2.0) }).unwrap();
    pass &= matches!(v.kind, SurfaceKind::VerticalPlane { .. }) && v.singular_set == SingularSet::Empty;
    let h = classify(SurfaceSpec::HorizontalPlane).unwrap();
    pass &= h.kind == SurfaceKind::HorizontalPlane && h.singular_set == SingularSet::Origin;
    let plane_cone = fixture("empty.json");
    let e = classify(SurfaceSpec::Cone(&plane_cone)).unwrap();
    pass &= e.kind == SurfaceKind::HorizontalPlane;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cones = vec![fixture("covering.json"), fixture("halfcircles.json")];
    cones.extend((0..20).map(|i| ConeSurface::new(random_covering(&mut rng, 2 + i % 7))));
    let mut worst_on_ray: f64 = 0.0;
    for cone in &cones {
        let c = classify(SurfaceSpec::Cone(cone)).unwrap();
        let centers: Vec<f64> = cone.family().arcs().iter().map(|a| a.center()).collect();
        pass &= matches!(&c.kind, SurfaceKind::ArcCone { arc_centers, .. } if *arc_centers == centers);
        let SingularSet::Rays(rays) = &c.singular_set else {
            pass = false;
            continue;
        };
        pass &= *rays == centers;
        for &angle in rays {
            for i in 1..=20 {
                let p = Vec2::from_polar(i as f64 * 0.05, angle);
                for side in cone.characteristic_vector(p).sides() {
                    worst_on_ray = worst_on_ray.max(side.norm());
                }
            }
        }
    }
    // non-covering families are rejected
    let gapped = fixture("three_arcs.json");
    pass &= classify(SurfaceSpec::Cone(&gapped)).is_err();
    pass &= worst_on_ray <= 1e-14;
    outcome(pass, format!("{} covering families; max |N| on singular rays {worst_on_ray:.1e}", cones.len()))
}

fn saddle() -> Outcome {
    let cone = fixture("halfcircles.json");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut exact = 0;
    for _ in 0..10_000 {
        let v = Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let d = (cone.evaluate(v) + v.x * v.y).abs();
        if d == 0.0 {
            exact += 1;
        }
        worst = worst.max(d / v.dot(v));
    }
    outcome(worst <= 1e-15, format!("max |u + xy| / |v|^2 = {worst:.1e}; {exact}/10000 bit-identical"))
}

fn truncation() -> Outcome {
    let tail = fixture("tail.json");
    let dom = Domain2D::disk(1.0, 128).unwrap();
    let r = truncation_convergence(tail.family(), &dom, &[2, 4, 8, 16]).unwrap();
    let detail = r
        .steps
        .iter()
        .map(|s| format!("{}->{}: {:.2e} <= {:.2e}", s.from, s.to, s.sup_diff, s.bound))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(r.pass && r.monotone, detail)
}

fn main() -> ExitCode {
    // libtest-style flags are accepted and ignored
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("1 lifting", lifting, Duration::from_secs(1)),
        ("2 closed forms", closed_forms, Duration::from_secs(5)),
        ("3 homogeneity", homogeneity, Duration::from_secs(60)),
        ("4 c1 dichotomy", c1_dichotomy, Duration::from_secs(60)),
        ("5 calibration", calibration, Duration::from_secs(10)),
        ("6 quadrature", quadrature, Duration::from_secs(60)),
        ("7 perturbation", perturbation, Duration::from_secs(120)),
        ("8 classification", classification, Duration::from_secs(60)),
        ("9 saddle", saddle, Duration::from_secs(60)),
        ("10 truncation", truncation, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) {
                continue;
            }
        }
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let ok = o.pass && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({:.2}s / {}s) {}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
