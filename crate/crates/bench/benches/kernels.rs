use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hcone_core::hgroup::lift_curve;
use hcone_core::perimeter::perimeter_of_graph;
use hcone_core::{ArcFamily, CalibrationField, ConeSurface, Domain2D, PlanarCurve, Vec2};

fn fixture(name: &str) -> ArcFamily {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
    let text = std::fs::read_to_string(format!("{path}{name}")).expect("fixture");
    ArcFamily::from_json_str(&text).expect("valid fixture")
}

fn grid(n: usize) -> Vec<Vec2> {
    (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            Vec2::new(-1.0 + 2.0 * (i as f64 + 0.5) / n as f64, -1.0 + 2.0 * (j as f64 + 0.5) / n as f64)
        })
        .collect()
}

fn evaluate(c: &mut Criterion) {
    let pts = grid(100);
    let mut g = c.benchmark_group("evaluate");
    for name in ["halfcircles.json", "three_arcs.json", "tail.json"] {
        let cone = ConeSurface::new(fixture(name));
        g.bench_with_input(BenchmarkId::from_parameter(name), &cone, |b, cone| {
            b.iter(|| pts.iter().map(|&v| cone.evaluate(black_box(v))).sum::<f64>())
        });
    }
    g.finish();
}

fn calibration(c: &mut Criterion) {
    let pts = grid(100);
    let cone = ConeSurface::new(fixture("three_arcs.json"));
    let field = CalibrationField::build(&cone).expect("finite family");
    c.bench_function("calibration/three_arcs", |b| {
        b.iter(|| pts.iter().map(|&v| field.at(black_box(v)).a).sum::<f64>())
    });
}

fn perimeter(c: &mut Criterion) {
    let cone = ConeSurface::new(fixture("three_arcs.json"));
    let mut g = c.benchmark_group("perimeter");
    g.sample_size(10);
    for n in [64, 128, 256] {
        let dom = Domain2D::disk(1.0, n).expect("resolution");
        g.bench_with_input(BenchmarkId::new("disk", n), &dom, |b, dom| b.iter(|| perimeter_of_graph(&cone, dom)));
    }
    g.finish();
}

fn lift(c: &mut Criterion) {
    let mut g = c.benchmark_group("lift");
    for n in [1_000, 100_000] {
        let pts = (0..=n)
            .map(|k| {
                let s = std::f64::consts::TAU * k as f64 / n as f64;
                Vec2::new(s.cos() + 0.3 * (5.0 * s).cos(), s.sin())
            })
            .collect();
        let curve = PlanarCurve::new(pts).expect("curve");
        g.bench_with_input(BenchmarkId::from_parameter(n), &curve, |b, curve| b.iter(|| lift_curve(curve, 0.0)));
    }
    g.finish();
}

criterion_group!(benches, evaluate, calibration, perimeter, lift);
criterion_main!(benches);
