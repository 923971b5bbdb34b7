//! Cross-checks between the independent routing oracles and ordering
//! properties of the joint optimum.

use pickbatch_core::fixtures::{tiny_instance, tiny_task};
use pickbatch_core::oracle::{self, OracleLimits};
use pickbatch_core::router::RouteMode;
use pickbatch_core::warehouse::GridPoint;

/// The state-space walk oracle and the literal multigraph enumeration are
/// two different algorithms for the same quantity.
#[test]
fn walk_and_multigraph_oracles_agree() {
    for seed in 200..230u64 {
        let (layout, products) = tiny_task(seed, 3);
        let sets: Vec<_> = products
            .iter()
            .map(|p| p.locations.iter().map(|l| l.subaisle).collect())
            .collect();
        let walk = oracle::no_reversal_walk_oracle(&layout, &sets).unwrap();
        let multi = oracle::no_reversal_multigraph_oracle(&layout, &sets).unwrap();
        assert!(
            (walk - multi).abs() <= 1e-9,
            "seed {seed}: walk {walk} vs multigraph {multi}"
        );
    }
}

/// Allowing reversal can only shorten the joint optimum, and relabeling
/// trolleys never changes a route's cost (the batching argmin is canonical).
#[test]
fn joint_reversal_never_worse() {
    let limits = OracleLimits::default();
    for seed in 0..12u64 {
        let inst = tiny_instance(seed);
        let (nr, b1) = oracle::joint_optimal(&inst, RouteMode::NoReversal, &limits).unwrap();
        let (rev, b2) = oracle::joint_optimal(&inst, RouteMode::Reversal, &limits).unwrap();
        assert!(
            rev <= nr + 1e-9,
            "seed {seed}: reversal {rev} > no-reversal {nr}"
        );
        b1.validate(&inst).unwrap();
        b2.validate(&inst).unwrap();
    }
}

/// A product picked at the far end of a dead-end subaisle shows the strict
/// reversal advantage: out-and-back beats any full traversal loop.
#[test]
fn reversal_strictly_helps_on_partial_picks() {
    use pickbatch_core::warehouse::{SubaisleId, WarehouseLayout};
    let layout = WarehouseLayout::uniform(3, 1, 1.0).unwrap();
    let q = [SubaisleId::new(2, 1)].into_iter().collect();
    let no_rev = oracle::no_reversal_walk_oracle(&layout, &[q]).unwrap();
    let pts = vec![vec![GridPoint::SubaislePoint {
        subaisle: SubaisleId::new(2, 1),
        offset: 0.25,
    }]];
    let rev = oracle::reversal_brute_force(&layout, &pts, &OracleLimits::default()).unwrap();
    assert!(
        rev < no_rev - 1e-9,
        "expected strict gain: {rev} vs {no_rev}"
    );
    // Out to the pick and straight back.
    assert!((rev - 2.0 * (1.0 + 1.0 + 0.25)).abs() <= 1e-9);
}
