mod common;

use std::f64::consts::TAU;
use std::path::PathBuf;

use common::any_family;
use hcone_core::calibrate::{distributional_divergence, CalibrationField, RegionField, TestFunction};
use hcone_core::geom::{signed_offset, Rotation};
use hcone_core::{ArcFamily, ConeSurface, Vec2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> ConeSurface {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    ConeSurface::new(ArcFamily::from_json_str(&std::fs::read_to_string(path).unwrap()).unwrap())
}

fn off_interfaces(field: &CalibrationField, theta: f64) -> bool {
    field.decomposition().interface_angles().iter().all(|&a| signed_offset(theta, a).abs() > 1e-9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unit_norm_and_orthogonal_to_rulings(f in any_family(), seed in any::<u64>()) {
        let cone = ConeSurface::new(f);
        let field = CalibrationField::build(&cone).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checked = 0;
        while checked < 10_000 / 64 + 1 {
            let theta = rng.gen_range(0.0..TAU);
            if !off_interfaces(&field, theta) {
                continue;
            }
            let v = Vec2::from_polar(rng.gen_range(1e-3..10.0), theta);
            let w = field.at(v);
            prop_assert!((w.norm() - 1.0).abs() <= 1e-14);
            let ray = cone.characteristic_ray(v).unwrap();
            prop_assert!(w.as_vec2().dot(ray.direction).abs() <= 1e-12);
            checked += 1;
        }
    }
}

#[test]
fn distributional_divergence_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for name in ["empty.json", "one_arc.json", "halfcircles.json", "three_arcs.json", "covering.json"] {
        let field = CalibrationField::build(&fixture(name)).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let phi = TestFunction {
                center: Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                radius: rng.gen_range(0.5..1.5),
            };
            worst = worst.max(distributional_divergence(&field, &phi, 4.0, 400, 6).abs());
        }
        println!("{name}: {worst:e}");
        assert!(worst < 1e-4, "{name}: {worst:e}");
    }
}

#[test]
fn distributional_divergence_sees_corruption() {
    let cone = fixture("halfcircles.json");
    let mut field = CalibrationField::build(&cone).unwrap();
    let d = field.decomposition_mut();
    // upper half of the arc centered at 0 sits next to its bisectrix (angle 0)
    let i = d.regions.iter().position(|r| r.start == 0.0).unwrap();
    let RegionField::Constant { value } = d.regions[i].field else { panic!("constant region expected") };
    let turned = Rotation::new(10f64.to_radians()).apply(value.as_vec2());
    d.regions[i].field = RegionField::Constant { value: turned.into() };
    let phi = TestFunction { center: Vec2::new(1.0, 0.0), radius: 0.8 };
    let got = distributional_divergence(&field, &phi, 4.0, 400, 6);
    assert!(got.abs() > 1e-2, "{got:e}");
}
