//! Batching heuristics: partial integer optimization and recomputed savings.
//!
//! PIO keeps the batching model's integrality only on the first `tau`
//! trolleys, solves, fixes what landed there, strips those orders and
//! trolleys, relabels and repeats. Each round first maximizes the basket
//! count the integral trolleys can absorb, then re-solves the distance
//! approximation with that count pinned, so the integral prefix is always
//! used as fully as possible.
//!
//! The savings heuristic is the classical merge loop: start with one order
//! per trolley, repeatedly apply the capacity-feasible merge with the
//! largest distance saving, recomputing savings after every merge. The
//! distance of a cluster comes either from a single-trolley solve of the
//! approximation model or from the exact router.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::approx::{self, BuildError, ExtractError, ModelConfig};
use crate::instance::{Batching, Instance, InstanceError, Order};
use crate::milp::{MilpModel, Sense, SolveError, Solver, VarCategory, VarId};
use crate::router::{self, PickTask, RouteError, RouteMode, TaskProduct, DEFAULT_REVERSAL_CAP};
use crate::util::round_to_i64;

/// Settings for [`pio_batch`]. Per-round time limits belong to the solver
/// passed in; configure the backend accordingly.
#[derive(Clone, Debug)]
pub struct PioConfig {
    /// Trolleys fixed per round; clamped to the remaining trolley count.
    pub tau: usize,
    pub model: ModelConfig,
}

impl Default for PioConfig {
    fn default() -> Self {
        PioConfig {
            tau: 1,
            model: ModelConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeurError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("solver error: {0}")]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("routing error: {0}")]
    Route(#[from] RouteError),
    #[error("instance error: {0}")]
    Instance(#[from] InstanceError),
    #[error("internal consistency: {0}")]
    Internal(String),
    #[error("cannot reach {target} trolleys under capacity {capacity}")]
    CannotReachTrolleys { target: usize, capacity: u32 },
}

/// Batches orders by partial integer optimization. Routing the result is the
/// caller's business (step (e) of the scheme).
pub fn pio_batch<S: Solver>(
    instance: &Instance,
    config: &PioConfig,
    solver: &S,
) -> Result<Batching, HeurError> {
    let mut batching = Batching::default();
    let mut remaining = instance.clone();
    let mut trolley_base = 0usize;

    while !remaining.orders().is_empty() {
        let t_left = remaining.num_trolleys();
        if t_left == 0 {
            return Err(HeurError::Internal(
                "orders remain but no trolleys left".into(),
            ));
        }
        let tau = config.tau.clamp(1, t_left);
        let sorted = remaining.sort_orders();

        let b_star = max_prefix_baskets(&sorted, tau, solver)?;

        // Re-solve the approximation with the prefix fill pinned to B*.
        let (mut model, catalog) = approx::build_partial(&sorted, &config.model, tau)?;
        let mut terms: Vec<(VarId, f64)> = Vec::new();
        for (oi, oid) in catalog.order_ids.iter().enumerate() {
            let baskets = sorted.order(oid).expect("order in instance").baskets;
            for t in 0..tau {
                terms.push((catalog.z[oi][t], f64::from(baskets)));
            }
        }
        model.add_constraint("pio_fill".into(), terms, Sense::Eq, b_star as f64);
        let result = solver.solve(&model)?;
        if !result.has_values() {
            return Err(HeurError::Internal(format!(
                "step (b) returned no solution for pinned fill {b_star}"
            )));
        }

        // Fix the orders landing on the integral prefix.
        let mut fixed: Vec<String> = Vec::new();
        for (oi, oid) in catalog.order_ids.iter().enumerate() {
            for t in 0..tau {
                if result.integral_value(catalog.z[oi][t])? == 1 {
                    batching.assign(oid, trolley_base + t + 1);
                    fixed.push(oid.clone());
                }
            }
        }
        if fixed.is_empty() {
            return Err(HeurError::Internal("a PIO round fixed no orders".into()));
        }

        let leftovers: Vec<Order> = sorted
            .orders()
            .iter()
            .filter(|o| !fixed.contains(&o.id))
            .cloned()
            .collect();
        trolley_base += tau;
        if leftovers.is_empty() {
            break;
        }
        remaining = Instance::new(
            sorted.layout().clone(),
            sorted.products().to_vec(),
            leftovers,
            t_left - tau,
            sorted.capacity(),
        )?;
    }
    Ok(batching)
}

/// Step (a) of a PIO round: the most baskets the first `tau` trolleys can
/// absorb, with only their assignment variables integral.
#[allow(clippy::needless_range_loop)]
pub fn max_prefix_baskets<S: Solver>(
    instance: &Instance,
    tau: usize,
    solver: &S,
) -> Result<u64, HeurError> {
    let num_t = instance.num_trolleys();
    let mut model = MilpModel::new("pio_fill");
    let mut z = Vec::with_capacity(instance.orders().len());
    for (oi, o) in instance.orders().iter().enumerate() {
        let mut row = Vec::with_capacity(num_t);
        for t in 0..num_t {
            let cat = if t < tau {
                VarCategory::Binary
            } else {
                VarCategory::Continuous
            };
            let v = model
                .add_var(format!("z_o{}_t{}", oi + 1, t + 1), cat, 0.0, 1.0)
                .map_err(SolveError::from)?;
            if t < tau {
                // Maximize baskets on the prefix.
                model.add_objective_term(v, -f64::from(o.baskets));
            }
            row.push(v);
        }
        z.push(row);
    }
    for (oi, _) in instance.orders().iter().enumerate() {
        let terms = (0..num_t).map(|t| (z[oi][t], 1.0)).collect();
        model.add_constraint(format!("assign_o{}", oi + 1), terms, Sense::Eq, 1.0);
    }
    for t in 0..num_t {
        let terms: Vec<(VarId, f64)> = instance
            .orders()
            .iter()
            .enumerate()
            .map(|(oi, o)| (z[oi][t], f64::from(o.baskets)))
            .collect();
        model.add_constraint(
            format!("cap_t{}", t + 1),
            terms,
            Sense::Le,
            f64::from(instance.capacity()),
        );
    }
    let result = solver.solve(&model)?;
    let obj = result
        .objective_value
        .ok_or_else(|| HeurError::Internal("fill model returned no objective".into()))?;
    Ok(round_to_i64(-obj) as u64)
}

/// How the savings loop prices a cluster of orders.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SavingsEstimator {
    /// Single-trolley solve of the distance approximation.
    Approx,
    /// Exact route distance in the chosen mode.
    ExactRoute,
}

/// Clarke-Wright-style batching with a recomputed savings matrix: orders
/// start alone (forced merges bring the count down to `T` first), then the
/// feasible merge with the largest positive saving is applied until none is
/// left. Ties go to the pair with the lexicographically smallest order ids.
pub fn savings_batch<S: Solver>(
    instance: &Instance,
    mode: RouteMode,
    estimator: SavingsEstimator,
    model: &ModelConfig,
    solver: &S,
) -> Result<Batching, HeurError> {
    let orders = instance.orders();
    let mut clusters: Vec<Vec<usize>> = (0..orders.len()).map(|i| alloc::vec![i]).collect();
    let mut cache: BTreeMap<Vec<usize>, f64> = BTreeMap::new();

    let load =
        |cluster: &[usize]| -> u64 { cluster.iter().map(|&i| u64::from(orders[i].baskets)).sum() };

    while clusters.len() > 1 {
        let forced = clusters.len() > instance.num_trolleys();
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                if load(&clusters[i]) + load(&clusters[j]) > u64::from(instance.capacity()) {
                    continue;
                }
                let di = cluster_distance(
                    instance,
                    &clusters[i],
                    mode,
                    estimator,
                    model,
                    solver,
                    &mut cache,
                )?;
                let dj = cluster_distance(
                    instance,
                    &clusters[j],
                    mode,
                    estimator,
                    model,
                    solver,
                    &mut cache,
                )?;
                let mut merged = clusters[i].clone();
                merged.extend(&clusters[j]);
                merged.sort_unstable();
                let dm = cluster_distance(
                    instance, &merged, mode, estimator, model, solver, &mut cache,
                )?;
                let saving = di + dj - dm;
                if best.as_ref().is_none_or(|&(s, _, _)| saving > s) {
                    best = Some((saving, i, j));
                }
            }
        }
        match best {
            Some((saving, i, j)) if forced || saving > 0.0 => {
                let b = clusters.remove(j);
                clusters[i].extend(b);
                clusters[i].sort_unstable();
                clusters.sort();
            }
            Some(_) | None => {
                if forced {
                    return Err(HeurError::CannotReachTrolleys {
                        target: instance.num_trolleys(),
                        capacity: instance.capacity(),
                    });
                }
                break;
            }
        }
    }
    if clusters.len() > instance.num_trolleys() {
        return Err(HeurError::CannotReachTrolleys {
            target: instance.num_trolleys(),
            capacity: instance.capacity(),
        });
    }

    clusters.sort();
    let mut batching = Batching::default();
    for (t, cluster) in clusters.iter().enumerate() {
        for &oi in cluster {
            batching.assign(&orders[oi].id, t + 1);
        }
    }
    Ok(batching)
}

fn cluster_distance<S: Solver>(
    instance: &Instance,
    cluster: &[usize],
    mode: RouteMode,
    estimator: SavingsEstimator,
    model_config: &ModelConfig,
    solver: &S,
    cache: &mut BTreeMap<Vec<usize>, f64>,
) -> Result<f64, HeurError> {
    if let Some(&d) = cache.get(cluster) {
        return Ok(d);
    }
    let orders: Vec<Order> = cluster
        .iter()
        .map(|&i| instance.orders()[i].clone())
        .collect();
    let d = match estimator {
        SavingsEstimator::Approx => {
            let sub = Instance::new(
                instance.layout().clone(),
                instance.products().to_vec(),
                orders,
                1,
                instance.capacity(),
            )?;
            let (model, _) = approx::build(&sub, model_config)?;
            let result = solver.solve(&model)?;
            result
                .objective_value
                .ok_or_else(|| HeurError::Internal("estimator solve had no objective".into()))?
        }
        SavingsEstimator::ExactRoute => {
            let mut pids: Vec<&String> = orders.iter().flat_map(|o| o.product_ids.iter()).collect();
            pids.sort();
            pids.dedup();
            let products: Vec<TaskProduct> = pids
                .into_iter()
                .map(|pid| {
                    let p = instance.product(pid).expect("validated product");
                    TaskProduct {
                        id: p.id.clone(),
                        locations: p.locations.clone(),
                    }
                })
                .collect();
            let task = PickTask {
                layout: instance.layout(),
                products,
            };
            match mode {
                RouteMode::NoReversal => router::route_no_reversal(&task, solver)?.distance,
                RouteMode::Reversal => {
                    router::route_reversal(&task, DEFAULT_REVERSAL_CAP)?.distance
                }
            }
        }
    };
    cache.insert(cluster.to_vec(), d);
    Ok(d)
}
