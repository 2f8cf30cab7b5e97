#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use vcapprox::bracketing::{DiscreteFunctionClass, NamedFunction};
use vcapprox::{GroundSpace, PointSet, SetFamily};

/// Ground with integer weights `w_i / Σw`.
pub fn ground(weights: &[u32]) -> Arc<GroundSpace> {
    let total: u32 = weights.iter().sum();
    Arc::new(
        GroundSpace::new(
            (0..weights.len()).map(|i| format!("p{i}")).collect(),
            weights.iter().map(|&w| w as f64 / total as f64).collect(),
        )
        .unwrap(),
    )
}

pub fn family_from_masks(g: Arc<GroundSpace>, masks: &[u32]) -> SetFamily {
    let n = g.len();
    SetFamily::from_sets(
        g,
        masks
            .iter()
            .map(|m| PointSet::from_fn(n, |p| m & (1 << p) != 0)),
    )
    .unwrap()
}

/// Random family on up to `max_points` points with up to `max_members`
/// members; weights are positive.
pub fn arb_family(max_points: usize, max_members: usize) -> impl Strategy<Value = SetFamily> {
    (1..=max_points).prop_flat_map(move |n| {
        (
            prop::collection::vec(1u32..10, n),
            prop::collection::vec(0u32..(1 << n), 0..=max_members),
        )
            .prop_map(|(w, masks)| family_from_masks(ground(&w), &masks))
    })
}

/// Functions with values on a 1/8 grid of [-1, 1].
pub fn arb_bounded_class(max_points: usize, max_functions: usize) -> impl Strategy<Value = DiscreteFunctionClass> {
    (1..=max_points, 1..=max_functions).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(1u32..10, n),
            prop::collection::vec(prop::collection::vec(-8i32..=8, n), m),
        )
            .prop_map(|(w, vals)| {
                DiscreteFunctionClass::new(
                    ground(&w),
                    vals.iter()
                        .enumerate()
                        .map(|(i, v)| NamedFunction {
                            name: format!("f{i}"),
                            values: v.iter().map(|&x| x as f64 / 8.0).collect(),
                        })
                        .collect(),
                    None,
                )
                .unwrap()
            })
    })
}
