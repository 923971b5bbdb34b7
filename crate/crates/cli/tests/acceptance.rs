//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Run with `cargo test -p pickbatch --test acceptance -- --nocapture` to
//! see the lines. Criterion 8 needs externally converted benchmark files
//! and is `#[ignore]`d; see its doc comment.

use std::time::Instant;

use pickbatch::solver::BuiltinSolver;
use pickbatch_core::approx::{self, ModelConfig, Symmetry};
use pickbatch_core::fixtures::{tiny_instance, tiny_task, worked_example};
use pickbatch_core::heuristics::{self, PioConfig, SavingsEstimator};
use pickbatch_core::instance::Instance;
use pickbatch_core::milp::Solver;
use pickbatch_core::oracle::{self, OracleLimits};
use pickbatch_core::router::{self, route_reversal, PickTask, RouteMode, DEFAULT_REVERSAL_CAP};
use pickbatch_core::warehouse::GridPoint;

const SEEDS: std::ops::Range<u64> = 0..30;

fn solve_objective(inst: &Instance, config: &ModelConfig, solver: &BuiltinSolver) -> f64 {
    let (model, _) = approx::build(inst, config).expect("build");
    solver
        .solve(&model)
        .expect("solve")
        .objective_value
        .expect("optimal value")
}

fn oracle_minimum(inst: &Instance, config: &ModelConfig, limits: &OracleLimits) -> f64 {
    let batchings = oracle::enumerate_batchings(inst, limits).expect("enumerate");
    let mut best = f64::INFINITY;
    for b in &batchings {
        let v = oracle::eval_approx_objective(inst, b, config, limits).expect("eval");
        best = best.min(v);
    }
    best
}

/// Criterion 1: on the worked example (four aisles, unit distances, picks on
/// the block-1 edges of aisles 1 and 3, one trolley) the approximation
/// optimum and the no-reversal routed distance are both exactly 6, with the
/// tour Origin-1-5-6-7-3-Origin among the optimal walks, in under a second.
#[test]
fn criterion_1_worked_example() {
    let start = Instant::now();
    let inst = worked_example();
    let solver = BuiltinSolver::new();

    let (model, catalog) = approx::build(&inst, &ModelConfig::default()).unwrap();
    let result = solver.solve(&model).unwrap();
    let objective = result.objective_value.unwrap();
    assert!(
        (objective - 6.0).abs() <= 1e-9,
        "approximation optimum {objective} != 6"
    );

    // The solution's structure: both pinned edges traversed, aisle 1 first
    // and aisle 3 last in block 1.
    let edge = |a, b| {
        catalog
            .edge_index(pickbatch_core::warehouse::SubaisleId::new(a, b))
            .unwrap()
    };
    assert!(result.value(catalog.x[0][edge(1, 1)]) > 0.5);
    assert!(result.value(catalog.x[0][edge(3, 1)]) > 0.5);
    assert!(result.value(catalog.gamma_f1[0][0]) > 0.5);
    assert!(result.value(catalog.gamma_l1[0][2]) > 0.5);

    let batching = approx::extract_batching(&catalog, &result).unwrap();
    let (routes, total) = router::route_batching(
        &inst,
        &batching,
        RouteMode::NoReversal,
        &solver,
        DEFAULT_REVERSAL_CAP,
    )
    .unwrap();
    assert!((total - 6.0).abs() <= 1e-9, "routed distance {total} != 6");

    // The walk (or its reversal; edges are undirected) visits 1,5,6,7,3 in
    // order between its origin endpoints.
    let walk = &routes[0].1.walk;
    let vertices: Vec<usize> = walk
        .iter()
        .filter_map(|p| match p {
            GridPoint::Vertex(v) => Some(*v),
            _ => None,
        })
        .collect();
    let target = [1, 5, 6, 7, 3];
    let forward = is_subsequence(&target, &vertices);
    let reversed: Vec<usize> = vertices.iter().rev().copied().collect();
    let backward = is_subsequence(&target, &reversed);
    assert!(
        forward || backward,
        "expected Origin-1-5-6-7-3-Origin among optimal walks, got {vertices:?}"
    );
    assert_eq!(walk.first(), Some(&GridPoint::Origin));
    assert_eq!(walk.last(), Some(&GridPoint::Origin));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!("acceptance criterion 1 (worked-example regression): PASS ({elapsed:?})");
}

fn is_subsequence(needle: &[usize], haystack: &[usize]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// Criterion 2: on 30 seeded random tiny instances the MILP optimum under
/// the full configuration equals the oracle's enumerated minimum within
/// 1e-6, inside a two-minute budget.
#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let solver = BuiltinSolver::new();
    let limits = OracleLimits::default();
    let config = ModelConfig::default();
    let mut checked = 0;
    for seed in SEEDS {
        let inst = tiny_instance(seed);
        let milp = solve_objective(&inst, &config, &solver);
        let oracle_best = oracle_minimum(&inst, &config, &limits);
        assert!(
            (milp - oracle_best).abs() <= 1e-6,
            "seed {seed}: MILP {milp} vs oracle {oracle_best}"
        );
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert!(checked >= 25, "only {checked} instances checked");
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "took {elapsed:?}, budget 2 min"
    );
    println!(
        "acceptance criterion 2 (oracle equivalence, {checked} instances): PASS ({elapsed:?})"
    );
}

/// Criterion 3: the approximation optimum never exceeds the joint
/// no-reversal optimum computed by enumeration.
#[test]
fn criterion_3_lower_bound() {
    let solver = BuiltinSolver::new();
    let limits = OracleLimits::default();
    let config = ModelConfig::default();
    let mut strict = 0;
    for seed in SEEDS {
        let inst = tiny_instance(seed);
        let approx_opt = solve_objective(&inst, &config, &solver);
        let (joint, _) = oracle::joint_optimal(&inst, RouteMode::NoReversal, &limits).unwrap();
        assert!(
            approx_opt <= joint + 1e-9,
            "seed {seed}: approximation {approx_opt} exceeds joint optimum {joint}"
        );
        if approx_opt < joint - 1e-6 {
            strict += 1;
        }
    }
    println!("acceptance criterion 3 (lower-bound property, strict on {strict} instances): PASS");
}

/// Criterion 4: the optimum is invariant to the symmetry setting and to the
/// LP-strengthening inequalities, while the LP root bound never drops and
/// strictly improves somewhere.
#[test]
fn criterion_4_constraint_soundness() {
    let solver = BuiltinSolver::new();
    let full = ModelConfig::default();
    let mut strictly_better = 0;
    for seed in SEEDS {
        let inst = tiny_instance(seed);
        let base = solve_objective(&inst, &full, &solver);
        for symmetry in [Symmetry::None, Symmetry::Basic] {
            let v = solve_objective(&inst, &ModelConfig { symmetry, ..full }, &solver);
            assert!(
                (v - base).abs() <= 1e-6,
                "seed {seed}: symmetry {symmetry:?} changed optimum {v} vs {base}"
            );
        }
        let no_cuts = ModelConfig {
            valid_inequalities: false,
            ..full
        };
        let v = solve_objective(&inst, &no_cuts, &solver);
        assert!(
            (v - base).abs() <= 1e-6,
            "seed {seed}: dropping inequalities changed optimum {v} vs {base}"
        );

        let lp = |config: &ModelConfig| {
            let (model, _) = approx::build(&inst, config).unwrap();
            solver
                .solve_relaxation(&model)
                .unwrap()
                .objective_value
                .unwrap()
        };
        let with = lp(&full);
        let without = lp(&no_cuts);
        assert!(
            with >= without - 1e-9,
            "seed {seed}: root bound dropped from {without} to {with}"
        );
        if with > without + 1e-6 {
            strictly_better += 1;
        }
    }
    assert!(
        strictly_better >= 1,
        "inequalities never improved the root bound"
    );
    println!(
        "acceptance criterion 4 (constraint soundness, {strictly_better} strict root-bound gains): PASS"
    );
}

/// Criterion 5: every returned solution passes the feasibility audit
/// (exactly-one, capacity, coverage, block parity), across configurations.
#[test]
fn criterion_5_solution_audits() {
    let solver = BuiltinSolver::new();
    let full = ModelConfig::default();
    let mut audited = 0;
    for seed in SEEDS {
        let inst = tiny_instance(seed);
        for config in [
            full,
            ModelConfig {
                symmetry: Symmetry::None,
                ..full
            },
            ModelConfig {
                valid_inequalities: false,
                ..full
            },
            ModelConfig {
                multiblock: false,
                ..full
            },
        ] {
            let (model, catalog) = approx::build(&inst, &config).unwrap();
            let result = solver.solve(&model).unwrap();
            approx::audit_solution(&inst, &catalog, &result)
                .unwrap_or_else(|e| panic!("seed {seed}: audit failed: {e}"));
            let batching = approx::extract_batching(&catalog, &result).unwrap();
            batching.validate(&inst).unwrap();
            audited += 1;
        }
    }
    println!("acceptance criterion 5 (parity/capacity/coverage audits, {audited} solutions): PASS");
}

/// Criterion 6: router ground truth. The no-reversal ILP matches the
/// even-degree-multigraph enumeration and the reversal DP matches the
/// permutation brute force on 25 random tasks each, with reversal never
/// beaten by no-reversal.
#[test]
fn criterion_6_router_oracles() {
    let solver = BuiltinSolver::new();
    let limits = OracleLimits::default();
    let mut checked = 0;
    for seed in 100..125u64 {
        let (layout, products) = tiny_task(seed, 3);
        let task = PickTask {
            layout: &layout,
            products: products.clone(),
        };

        let no_rev = router::route_no_reversal(&task, &solver).unwrap();
        let edge_sets: Vec<_> = products
            .iter()
            .map(|p| p.locations.iter().map(|l| l.subaisle).collect())
            .collect();
        let enumerated = oracle::no_reversal_multigraph_oracle(&layout, &edge_sets).unwrap();
        assert!(
            (no_rev.distance - enumerated).abs() <= 1e-9,
            "seed {seed}: ILP {} vs enumeration {}",
            no_rev.distance,
            enumerated
        );
        router::audit_route(&layout, &no_rev).unwrap();

        let rev = router::route_reversal(&task, DEFAULT_REVERSAL_CAP).unwrap();
        let points: Vec<Vec<GridPoint>> = products
            .iter()
            .map(|p| {
                p.locations
                    .iter()
                    .map(|l| GridPoint::SubaislePoint {
                        subaisle: l.subaisle,
                        offset: l.offset,
                    })
                    .collect()
            })
            .collect();
        let brute = oracle::reversal_brute_force(&layout, &points, &limits).unwrap();
        assert!(
            (rev.distance - brute).abs() <= 1e-9,
            "seed {seed}: DP {} vs permutations {}",
            rev.distance,
            brute
        );
        router::audit_route(&layout, &rev).unwrap();

        assert!(
            rev.distance <= no_rev.distance + 1e-9,
            "seed {seed}: reversal {} worse than no-reversal {}",
            rev.distance,
            no_rev.distance
        );
        checked += 1;
    }
    assert!(checked >= 20);

    // Denser reversal tasks up to the seven-pick bound.
    for seed in 300..310u64 {
        let (layout, products) = tiny_task(seed, 7);
        let task = PickTask {
            layout: &layout,
            products: products.clone(),
        };
        let rev = route_reversal(&task, DEFAULT_REVERSAL_CAP);
        let rev = match rev {
            Ok(r) => r,
            Err(e) => panic!("seed {seed}: {e}"),
        };
        let points: Vec<Vec<GridPoint>> = products
            .iter()
            .map(|p| {
                p.locations
                    .iter()
                    .map(|l| GridPoint::SubaislePoint {
                        subaisle: l.subaisle,
                        offset: l.offset,
                    })
                    .collect()
            })
            .collect();
        let brute = oracle::reversal_brute_force(&layout, &points, &limits).unwrap();
        assert!(
            (rev.distance - brute).abs() <= 1e-9,
            "seed {seed}: DP {} vs permutations {} on {} products",
            rev.distance,
            brute,
            products.len()
        );
    }
    println!("acceptance criterion 6 (router oracles, {checked}+10 tasks): PASS");
}

/// Criterion 7: PIO with tau = T reproduces the exact optimum; PIO with
/// tau = 1 and the savings heuristic return feasible batchings evaluating to
/// at least the optimum.
#[test]
fn criterion_7_heuristic_contracts() {
    let solver = BuiltinSolver::new();
    let limits = OracleLimits::default();
    let config = ModelConfig::default();
    for seed in 0..15u64 {
        let inst = tiny_instance(seed);
        let exact = solve_objective(&inst, &config, &solver);

        let pio_full = heuristics::pio_batch(
            &inst,
            &PioConfig {
                tau: inst.num_trolleys(),
                model: config,
            },
            &solver,
        )
        .unwrap();
        pio_full.validate(&inst).unwrap();
        let v = oracle::eval_approx_objective(&inst, &pio_full, &config, &limits).unwrap();
        assert!(
            (v - exact).abs() <= 1e-6,
            "seed {seed}: PIO tau=T value {v} differs from exact {exact}"
        );

        let pio_one = heuristics::pio_batch(
            &inst,
            &PioConfig {
                tau: 1,
                model: config,
            },
            &solver,
        )
        .unwrap();
        pio_one.validate(&inst).unwrap();
        let v1 = oracle::eval_approx_objective(&inst, &pio_one, &config, &limits).unwrap();
        assert!(
            v1 >= exact - 1e-6,
            "seed {seed}: PIO tau=1 value {v1} below optimum {exact}"
        );

        let savings = heuristics::savings_batch(
            &inst,
            RouteMode::NoReversal,
            SavingsEstimator::ExactRoute,
            &config,
            &solver,
        )
        .unwrap();
        savings.validate(&inst).unwrap();
        let vs = oracle::eval_approx_objective(&inst, &savings, &config, &limits).unwrap();
        assert!(
            vs >= exact - 1e-6,
            "seed {seed}: savings value {vs} below optimum {exact}"
        );
    }
    println!("acceptance criterion 7 (heuristic contracts, 15 instances): PASS");
}

/// Conditional reproduction, not part of CI: the published five-order
/// multi-block benchmark with known optima. Needs that instance converted
/// to the JSON schema and pointed to by `PICKBATCH_BENCHMARK_INSTANCE`;
/// expected values: approximation optimum 384.6, root bound 384.6, routed
/// no-reversal 384.6, routed reversal 348.6, all within 0.1. Reversal is
/// skipped when a trolley carries more products than the DP cap.
#[test]
#[ignore = "needs the published benchmark converted to the instance schema; set PICKBATCH_BENCHMARK_INSTANCE"]
fn criterion_8_conditional_reproduction() {
    let Some(path) = std::env::var_os("PICKBATCH_BENCHMARK_INSTANCE") else {
        panic!("PICKBATCH_BENCHMARK_INSTANCE not set");
    };
    let text = std::fs::read_to_string(&path).expect("readable instance file");
    let inst = pickbatch::formats::instance_io::parse_instance(&text).expect("valid instance");
    let solver = BuiltinSolver::new();

    let (model, catalog) = approx::build(&inst, &ModelConfig::default()).unwrap();
    let result = solver.solve(&model).unwrap();
    let objective = result.objective_value.unwrap();
    assert!(
        (objective - 384.6).abs() <= 0.1,
        "approximation optimum {objective}"
    );
    let root = solver
        .solve_relaxation(&model)
        .unwrap()
        .objective_value
        .unwrap();
    assert!((root - 384.6).abs() <= 0.1, "root bound {root}");

    let batching = approx::extract_batching(&catalog, &result).unwrap();
    let (_, total_nr) = router::route_batching(
        &inst,
        &batching,
        RouteMode::NoReversal,
        &solver,
        DEFAULT_REVERSAL_CAP,
    )
    .unwrap();
    assert!(
        (total_nr - 384.6).abs() <= 0.1,
        "no-reversal routed {total_nr}"
    );

    match router::route_batching(
        &inst,
        &batching,
        RouteMode::Reversal,
        &solver,
        DEFAULT_REVERSAL_CAP,
    ) {
        Ok((_, total_rev)) => {
            assert!(
                (total_rev - 348.6).abs() <= 0.1,
                "reversal routed {total_rev}"
            );
        }
        Err(router::RouteError::OnTrolley { source, .. })
            if matches!(*source, router::RouteError::TooManyPicks { .. }) =>
        {
            println!("reversal skipped: trolley exceeds the DP cap");
        }
        Err(e) => panic!("reversal routing failed: {e}"),
    }
    println!("acceptance criterion 8 (conditional reproduction): PASS");
}
