#![allow(dead_code)]

use std::f64::consts::TAU;

use hcone_core::arcs::{Arc, ArcFamily};
use proptest::prelude::*;

/// Arcs between consecutive cut points, each shrunk about its center by the
/// matching factor (1 keeps the closures tiling the circle).
pub fn family_from(cuts: &[f64], shrink: &[f64]) -> Option<ArcFamily> {
    let mut cuts = cuts.to_vec();
    cuts.sort_by(f64::total_cmp);
    let k = cuts.len();
    let mut arcs = Vec::with_capacity(k);
    for i in 0..k {
        let a = cuts[i];
        let b = if i + 1 < k { cuts[i + 1] } else { cuts[0] + TAU };
        let half = 0.5 * (b - a) * shrink[i];
        if !(half > 0.05 && half < std::f64::consts::PI - 0.05) {
            return None;
        }
        arcs.push(Arc::new(0.5 * (a + b), half).ok()?);
    }
    ArcFamily::validate(arcs).ok()
}

pub fn covering_family() -> impl Strategy<Value = ArcFamily> {
    prop::collection::vec(0.0..TAU, 2..=8)
        .prop_filter_map("degenerate arcs", |cuts| family_from(&cuts, &vec![1.0; cuts.len()]))
}

pub fn gapped_family() -> impl Strategy<Value = ArcFamily> {
    (prop::collection::vec(0.0..TAU, 2..=8), prop::collection::vec(0.2..0.95f64, 8), 1..=8usize)
        .prop_filter_map("degenerate arcs", |(cuts, shrink, keep)| {
            let f = family_from(&cuts, &shrink[..cuts.len()])?;
            let arcs: Vec<Arc> = f.arcs().iter().take(keep).copied().collect();
            ArcFamily::validate(arcs).ok()
        })
}

pub fn any_family() -> impl Strategy<Value = ArcFamily> {
    prop_oneof![covering_family(), gapped_family()]
}
