//! Model-level invariants that need a solver: pruning and relaxation
//! soundness, determinism, structural facts about optimal solutions, and
//! directed heuristic behaviors.

use pickbatch::solver::BuiltinSolver;
use pickbatch_core::approx::{self, ModelConfig};
use pickbatch_core::fixtures::tiny_instance;
use pickbatch_core::heuristics::{self, SavingsEstimator};
use pickbatch_core::instance::{Instance, Order, PickLocation, Product};
use pickbatch_core::milp::{Sense, Solver};
use pickbatch_core::router::RouteMode;
use pickbatch_core::warehouse::{SubaisleId, WarehouseLayout};

fn solve(inst: &Instance, config: &ModelConfig, solver: &BuiltinSolver) -> f64 {
    let (model, _) = approx::build(inst, config).unwrap();
    solver.solve(&model).unwrap().objective_value.unwrap()
}

/// Removing dominated coverage rows never moves the optimum.
#[test]
fn pruning_preserves_the_optimum() {
    let solver = BuiltinSolver::new();
    for seed in 0..20u64 {
        let inst = tiny_instance(seed);
        let with = solve(&inst, &ModelConfig::default(), &solver);
        let without = solve(
            &inst,
            &ModelConfig {
                prune_dominated: false,
                ..ModelConfig::default()
            },
            &solver,
        );
        assert!(
            (with - without).abs() <= 1e-6,
            "seed {seed}: pruned {with} vs unpruned {without}"
        );
    }
}

/// The LP relaxation never exceeds the integer optimum, and re-solving the
/// same model reproduces the same value.
#[test]
fn relaxation_bound_and_determinism() {
    let solver = BuiltinSolver::new();
    for seed in 0..20u64 {
        let inst = tiny_instance(seed);
        let (model, _) = approx::build(&inst, &ModelConfig::default()).unwrap();
        let milp = solver.solve(&model).unwrap().objective_value.unwrap();
        let lp = solver
            .solve_relaxation(&model)
            .unwrap()
            .objective_value
            .unwrap();
        assert!(
            lp <= milp + 1e-9,
            "seed {seed}: relaxation {lp} above optimum {milp}"
        );
        let again = solver.solve(&model).unwrap().objective_value.unwrap();
        assert!(
            (milp - again).abs() <= 1e-9,
            "seed {seed}: non-deterministic objective"
        );
    }
}

/// Any used trolley must traverse a block-1 edge: the origin legs are
/// anchored there, so the first/last markers force one on.
#[test]
fn used_trolleys_touch_block_one() {
    let solver = BuiltinSolver::new();
    for seed in 0..20u64 {
        let inst = tiny_instance(seed);
        let (model, catalog) = approx::build(&inst, &ModelConfig::default()).unwrap();
        let result = solver.solve(&model).unwrap();
        for t in 0..catalog.num_trolleys {
            let used = result.value(catalog.alpha[t]) > 0.5;
            if !used {
                continue;
            }
            let touches = catalog
                .edges
                .iter()
                .enumerate()
                .any(|(ei, e)| e.block == 1 && result.value(catalog.x[t][ei]) > 0.5);
            assert!(
                touches,
                "seed {seed}: used trolley {} avoids block 1",
                t + 1
            );
        }
    }
}

/// The bare single-block formulation is also a valid lower bound on the
/// joint no-reversal optimum.
#[test]
fn basic_model_is_a_lower_bound_too() {
    use pickbatch_core::oracle::{self, OracleLimits};
    let solver = BuiltinSolver::new();
    let limits = OracleLimits::default();
    for seed in 0..15u64 {
        let inst = tiny_instance(seed);
        let v = solve(&inst, &ModelConfig::basic(), &solver);
        let (joint, _) = oracle::joint_optimal(&inst, RouteMode::NoReversal, &limits).unwrap();
        assert!(
            v <= joint + 1e-9,
            "seed {seed}: basic model {v} above joint {joint}"
        );
    }
}

/// Pinning a round's basket fill to its maximum can only restrict: the
/// constrained objective is at least the free optimum.
#[test]
fn pio_round_is_monotone() {
    let solver = BuiltinSolver::new();
    let config = ModelConfig::default();
    for seed in 0..10u64 {
        let inst = tiny_instance(seed).sort_orders();
        // Baseline: the same partially-integral model without the pin.
        let (free_model, _) = approx::build_partial(&inst, &config, 1).unwrap();
        let free = solver.solve(&free_model).unwrap().objective_value.unwrap();
        let b_star = heuristics::max_prefix_baskets(&inst, 1, &solver).unwrap();
        let (mut model, catalog) = approx::build_partial(&inst, &config, 1).unwrap();
        let terms: Vec<_> = catalog
            .order_ids
            .iter()
            .enumerate()
            .map(|(oi, oid)| {
                (
                    catalog.z[oi][0],
                    f64::from(inst.order(oid).unwrap().baskets),
                )
            })
            .collect();
        model.add_constraint("fill".into(), terms, Sense::Eq, b_star as f64);
        let pinned = solver.solve(&model).unwrap().objective_value.unwrap();
        assert!(
            pinned >= free - 1e-6,
            "seed {seed}: pinned round {pinned} below free optimum {free}"
        );
    }
}

fn two_order_layout() -> (WarehouseLayout, Vec<Product>) {
    let layout = WarehouseLayout::uniform(4, 1, 1.0).unwrap();
    let products = vec![
        Product {
            id: "shared".into(),
            locations: vec![PickLocation {
                subaisle: SubaisleId::new(2, 1),
                offset: 0.5,
            }],
        },
        Product {
            id: "west".into(),
            locations: vec![PickLocation {
                subaisle: SubaisleId::new(1, 1),
                offset: 0.5,
            }],
        },
        Product {
            id: "east".into(),
            locations: vec![PickLocation {
                subaisle: SubaisleId::new(4, 1),
                offset: 0.5,
            }],
        },
    ];
    (layout, products)
}

/// Orders sharing a subaisle merge (the saving is a full round trip), while
/// far-apart orders under tight capacity stay apart.
#[test]
fn savings_merges_and_refusals() {
    let solver = BuiltinSolver::new();
    let config = ModelConfig::default();
    let (layout, products) = two_order_layout();

    let sharing = Instance::new(
        layout.clone(),
        products.clone(),
        vec![
            Order {
                id: "a".into(),
                product_ids: vec!["shared".into()],
                baskets: 1,
            },
            Order {
                id: "b".into(),
                product_ids: vec!["shared".into()],
                baskets: 1,
            },
        ],
        2,
        2,
    )
    .unwrap();
    let b = heuristics::savings_batch(
        &sharing,
        RouteMode::NoReversal,
        SavingsEstimator::ExactRoute,
        &config,
        &solver,
    )
    .unwrap();
    assert_eq!(
        b.trolley_of("a"),
        b.trolley_of("b"),
        "identical picks should merge"
    );

    let apart = Instance::new(
        layout,
        products,
        vec![
            Order {
                id: "w".into(),
                product_ids: vec!["west".into()],
                baskets: 2,
            },
            Order {
                id: "e".into(),
                product_ids: vec!["east".into()],
                baskets: 2,
            },
        ],
        2,
        3,
    )
    .unwrap();
    let b = heuristics::savings_batch(
        &apart,
        RouteMode::NoReversal,
        SavingsEstimator::ExactRoute,
        &config,
        &solver,
    )
    .unwrap();
    // Capacity blocks the merge (2 + 2 > 3), so they stay on two trolleys.
    assert_ne!(b.trolley_of("w"), b.trolley_of("e"));
}

/// The approximation-based estimator drives the same merge decisions on
/// these directed cases.
#[test]
fn savings_with_approx_estimator() {
    let solver = BuiltinSolver::new();
    let config = ModelConfig::default();
    let (layout, products) = two_order_layout();
    let inst = Instance::new(
        layout,
        products,
        vec![
            Order {
                id: "a".into(),
                product_ids: vec!["shared".into()],
                baskets: 1,
            },
            Order {
                id: "b".into(),
                product_ids: vec!["shared".into(), "west".into()],
                baskets: 1,
            },
        ],
        2,
        2,
    )
    .unwrap();
    let b = heuristics::savings_batch(
        &inst,
        RouteMode::NoReversal,
        SavingsEstimator::Approx,
        &config,
        &solver,
    )
    .unwrap();
    b.validate(&inst).unwrap();
    assert_eq!(b.trolley_of("a"), b.trolley_of("b"));
}

/// With no orders everything collapses: the optimum is zero and no trolley
/// is marked used.
#[test]
fn empty_order_list_solves_to_zero() {
    let layout = WarehouseLayout::uniform(3, 2, 1.0).unwrap();
    let inst = Instance::new(layout, vec![], vec![], 2, 3).unwrap();
    let solver = BuiltinSolver::new();
    let (model, catalog) = approx::build(&inst, &ModelConfig::default()).unwrap();
    let result = solver.solve(&model).unwrap();
    assert_eq!(result.objective_value.unwrap(), 0.0);
    for t in 0..catalog.num_trolleys {
        assert!(result.value(catalog.alpha[t]) < 1e-6);
    }
}

/// Heuristics are deterministic: identical inputs give identical batchings.
#[test]
fn heuristics_are_deterministic() {
    let solver = BuiltinSolver::new();
    let config = ModelConfig::default();
    for seed in [3u64, 7, 11] {
        let inst = tiny_instance(seed);
        let p1 = heuristics::pio_batch(
            &inst,
            &pickbatch_core::heuristics::PioConfig {
                tau: 1,
                model: config,
            },
            &solver,
        )
        .unwrap();
        let p2 = heuristics::pio_batch(
            &inst,
            &pickbatch_core::heuristics::PioConfig {
                tau: 1,
                model: config,
            },
            &solver,
        )
        .unwrap();
        assert_eq!(p1, p2, "seed {seed}: PIO batchings differ between runs");
        let s1 = heuristics::savings_batch(
            &inst,
            RouteMode::NoReversal,
            SavingsEstimator::ExactRoute,
            &config,
            &solver,
        )
        .unwrap();
        let s2 = heuristics::savings_batch(
            &inst,
            RouteMode::NoReversal,
            SavingsEstimator::ExactRoute,
            &config,
            &solver,
        )
        .unwrap();
        assert_eq!(s1, s2, "seed {seed}: savings batchings differ between runs");
    }
}

/// Parse-serialize round trip on the random family.
#[test]
fn instance_documents_round_trip() {
    use pickbatch::formats::instance_io::{parse_instance, serialize_instance};
    for seed in 0..25u64 {
        let inst = tiny_instance(seed);
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(inst, back, "seed {seed} failed the round trip");
    }
}

/// A pick deep in a far block makes the cut loop work: without connectivity
/// rows the cheapest even multigraph is two disjoint loops (the far edge
/// doubled on its own), so the router must separate and reconnect it.
#[test]
fn connectivity_cuts_reconnect_floating_loops() {
    use pickbatch_core::oracle;
    use pickbatch_core::router::{self, PickTask, TaskProduct};

    let layout = WarehouseLayout::uniform(3, 2, 1.0).unwrap();
    let products = vec![
        TaskProduct {
            id: "near".into(),
            locations: vec![PickLocation {
                subaisle: SubaisleId::new(1, 1),
                offset: 0.5,
            }],
        },
        TaskProduct {
            id: "far".into(),
            locations: vec![PickLocation {
                subaisle: SubaisleId::new(3, 2),
                offset: 0.5,
            }],
        },
    ];
    let task = PickTask {
        layout: &layout,
        products: products.clone(),
    };
    let solver = BuiltinSolver::new();
    let route = router::route_no_reversal(&task, &solver).unwrap();

    let sets: Vec<_> = products
        .iter()
        .map(|p| p.locations.iter().map(|l| l.subaisle).collect())
        .collect();
    let truth = oracle::no_reversal_multigraph_oracle(&layout, &sets).unwrap();
    assert!((route.distance - truth).abs() <= 1e-9);

    // The disconnected two-loop "solution" would cost 2+2 for the doubled
    // aisle edges plus the origin legs; the true optimum must pay the
    // cross-aisle travel out to aisle 3 block 2 and is strictly larger.
    let disconnected = 2.0 * 1.0 + 2.0 * 1.0 + 2.0 * 1.0;
    assert!(
        route.distance > disconnected + 1e-9,
        "route {} should exceed the floating-loop bound {disconnected}",
        route.distance
    );
    router::audit_route(&layout, &route).unwrap();
}

/// Hand-computed optimum exercising both cross-aisle excursions and the
/// parity term at once. Picks: block 1 aisle 2, block 2 aisles 1 and 4, all
/// unit distances, origin offset 1. The best edge set adds the spare
/// block-1 edge of aisle 1: it pays 1, cancels the Westward excursion (2)
/// and the odd-block penalty (1).
///   aisles 4 + origin legs (1+2) + span 1 + East excursion 2*(3-1) = 12.
#[test]
fn extension_and_parity_worked_by_hand() {
    use pickbatch_core::oracle::{self, OracleLimits};

    let layout = WarehouseLayout::uniform(4, 2, 1.0).unwrap();
    let inst = Instance::new(
        layout,
        vec![
            Product {
                id: "mid".into(),
                locations: vec![PickLocation {
                    subaisle: SubaisleId::new(2, 1),
                    offset: 0.5,
                }],
            },
            Product {
                id: "west-deep".into(),
                locations: vec![PickLocation {
                    subaisle: SubaisleId::new(1, 2),
                    offset: 0.5,
                }],
            },
            Product {
                id: "east-deep".into(),
                locations: vec![PickLocation {
                    subaisle: SubaisleId::new(4, 2),
                    offset: 0.5,
                }],
            },
        ],
        vec![Order {
            id: "o".into(),
            product_ids: vec!["mid".into(), "west-deep".into(), "east-deep".into()],
            baskets: 1,
        }],
        1,
        1,
    )
    .unwrap();

    let solver = BuiltinSolver::new();
    let milp = solve(&inst, &ModelConfig::default(), &solver);
    assert!((milp - 12.0).abs() <= 1e-9, "expected 12, got {milp}");

    let mut b = pickbatch_core::instance::Batching::default();
    b.assign("o", 1);
    let oracle_v =
        oracle::eval_approx_objective(&inst, &b, &ModelConfig::default(), &OracleLimits::default())
            .unwrap();
    assert!(
        (oracle_v - 12.0).abs() <= 1e-9,
        "oracle disagrees: {oracle_v}"
    );

    // Without the extension the deep-block span goes uncharged.
    let no_ext = solve(
        &inst,
        &ModelConfig {
            multiblock: false,
            ..ModelConfig::default()
        },
        &solver,
    );
    assert!(
        no_ext < milp - 1e-9,
        "extension should tighten: {no_ext} vs {milp}"
    );
}
