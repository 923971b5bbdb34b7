//! Builds the distance-approximation MILP that decides the batching.
//!
//! For every trolley the objective charges the aisle edges it traverses, an
//! origin leg to the first and from the last aisle it uses in block 1, and a
//! cross-aisle span `D^WE`. Three optional refinements sharpen the estimate:
//!
//! * the multi-block extension widens `D^WE` when blocks beyond the first
//!   are visited further West or East than the block-1 span;
//! * the parity term charges the cheapest subaisle of a block once more
//!   whenever a trolley traverses an odd number of edges there (an odd count
//!   cannot close a walk);
//! * symmetry-breaking rows pin equivalent trolley relabelings, and a family
//!   of valid inequalities lifts the LP relaxation.
//!
//! Only `z` (order-to-trolley), `x` (edge-used) and `w` (parity counters)
//! carry integrality; every other variable is continuous and comes out
//! integral at the optimum. The builder can also restrict integrality to the
//! first `tau` trolleys, which is what the partial-integer-optimization
//! heuristic iterates on.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::instance::{Batching, Instance, InstanceError, Order};
use crate::milp::{
    ConstraintDef, MilpModel, ModelError, Sense, SolveError, SolveResult, VarCategory, VarId,
};
use crate::util::{ceil_div, round_to_i64};
use crate::warehouse::SubaisleId;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Symmetry {
    /// No symmetry handling.
    None,
    /// Order `o` may only ride trolleys `1..=o`.
    Basic,
    /// Basic plus the first-free-trolley forcing rows.
    #[default]
    Strong,
}

/// Which refinements to build into the model. Defaults to everything on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ModelConfig {
    pub multiblock: bool,
    pub parity: bool,
    pub symmetry: Symmetry,
    pub valid_inequalities: bool,
    pub prune_dominated: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            multiblock: true,
            parity: true,
            symmetry: Symmetry::Strong,
            valid_inequalities: true,
            prune_dominated: true,
        }
    }
}

impl ModelConfig {
    /// The bare single-block formulation with nothing switched on.
    pub fn basic() -> Self {
        ModelConfig {
            multiblock: false,
            parity: false,
            symmetry: Symmetry::None,
            valid_inequalities: false,
            prune_dominated: false,
        }
    }
}

/// Typed handles to every variable family of a built model, plus the order
/// sequence the model was built with (sorting may reindex orders).
#[derive(Clone, Debug)]
pub struct VariableCatalog {
    pub order_ids: Vec<String>,
    pub edges: Vec<SubaisleId>,
    pub num_trolleys: usize,
    /// `z[o][t]`: order `o` rides trolley `t`.
    pub z: Vec<Vec<VarId>>,
    /// `x[t][e]`: trolley `t` traverses aisle edge `e`.
    pub x: Vec<Vec<VarId>>,
    /// Trolley used at all.
    pub alpha: Vec<VarId>,
    /// `beta1[t][a]`: block-1 edge of aisle `a` used by trolley `t`.
    pub beta1: Vec<Vec<VarId>>,
    /// Lowest / highest block-1 aisle used.
    pub gamma_f1: Vec<Vec<VarId>>,
    pub gamma_l1: Vec<Vec<VarId>>,
    /// Cross-aisle distance contribution.
    pub d_we: Vec<VarId>,
    /// Multi-block extension families (present when built with it).
    pub alpha_hat: Option<Vec<VarId>>,
    pub beta2: Option<Vec<Vec<VarId>>>,
    pub gamma_f2: Option<Vec<Vec<VarId>>>,
    pub gamma_l2: Option<Vec<Vec<VarId>>>,
    pub z_first: Option<Vec<VarId>>,
    pub z_last: Option<Vec<VarId>>,
    /// Parity families (present when built with the parity term).
    pub y: Option<Vec<Vec<VarId>>>,
    pub w: Option<Vec<Vec<VarId>>>,
}

impl VariableCatalog {
    pub fn edge_index(&self, edge: SubaisleId) -> Option<usize> {
        self.edges.iter().position(|&e| e == edge)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("instance error: {0}")]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error("order \"{order}\" has fractional assignment z={value} on trolley {trolley}")]
    Fractional {
        order: String,
        trolley: usize,
        value: f64,
    },
    #[error("order \"{order}\" assigned to {count} trolleys")]
    NotExactlyOne { order: String, count: usize },
    #[error("solution carries no values")]
    NoValues,
}

/// Builds the full model: every trolley's `z`, `x` and `w` are integral.
pub fn build(
    instance: &Instance,
    config: &ModelConfig,
) -> Result<(MilpModel, VariableCatalog), BuildError> {
    build_partial(instance, config, instance.num_trolleys())
}

/// Builds the model with integrality only on trolleys `1..=integral_prefix`;
/// later trolleys get the same variables declared continuous. The full build
/// is `integral_prefix = T`.
#[allow(clippy::needless_range_loop)] // indices mirror the trolley/aisle/block structure
pub fn build_partial(
    instance: &Instance,
    config: &ModelConfig,
    integral_prefix: usize,
) -> Result<(MilpModel, VariableCatalog), BuildError> {
    let sorted;
    let inst = if config.symmetry != Symmetry::None {
        sorted = instance.sort_orders();
        &sorted
    } else {
        instance
    };

    let layout = inst.layout();
    let num_t = inst.num_trolleys();
    let num_a = layout.num_aisles();
    let num_b = layout.num_blocks();
    let orders = inst.orders();
    let edges = layout.all_subaisles();
    let tau = integral_prefix.min(num_t);

    let d1: Vec<f64> = (1..=num_a)
        .map(|a| layout.cross_distance(1, a).expect("valid aisle"))
        .collect();
    let d0: Vec<f64> = (1..=num_a)
        .map(|a| layout.origin_to_aisle(a).expect("valid aisle"))
        .collect();
    let edge_len: Vec<f64> = edges
        .iter()
        .map(|&e| layout.subaisle_length(e).expect("valid subaisle"))
        .collect();

    let mut model = MilpModel::new("batch_approx");

    let int_or = |t: usize, cat: VarCategory| {
        if t < tau {
            cat
        } else {
            VarCategory::Continuous
        }
    };

    let mut z = Vec::with_capacity(orders.len());
    for (oi, _) in orders.iter().enumerate() {
        let mut row = Vec::with_capacity(num_t);
        for t in 0..num_t {
            row.push(model.add_var(
                format!("z_o{}_t{}", oi + 1, t + 1),
                int_or(t, VarCategory::Binary),
                0.0,
                1.0,
            )?);
        }
        z.push(row);
    }

    let mut x = Vec::with_capacity(num_t);
    for t in 0..num_t {
        let mut row = Vec::with_capacity(edges.len());
        for &e in &edges {
            row.push(model.add_var(
                format!("x_t{}_a{}_b{}", t + 1, e.aisle, e.block),
                int_or(t, VarCategory::Binary),
                0.0,
                1.0,
            )?);
        }
        x.push(row);
    }

    let mut alpha = Vec::with_capacity(num_t);
    let mut beta1 = Vec::with_capacity(num_t);
    let mut gamma_f1 = Vec::with_capacity(num_t);
    let mut gamma_l1 = Vec::with_capacity(num_t);
    let mut d_we = Vec::with_capacity(num_t);
    for t in 0..num_t {
        alpha.push(model.add_var(format!("al_t{}", t + 1), VarCategory::Continuous, 0.0, 1.0)?);
        let mut b_row = Vec::with_capacity(num_a);
        let mut f_row = Vec::with_capacity(num_a);
        let mut l_row = Vec::with_capacity(num_a);
        for a in 1..=num_a {
            b_row.push(model.add_var(
                format!("b1_t{}_a{a}", t + 1),
                VarCategory::Continuous,
                0.0,
                1.0,
            )?);
            f_row.push(model.add_var(
                format!("gF1_t{}_a{a}", t + 1),
                VarCategory::Continuous,
                0.0,
                1.0,
            )?);
            l_row.push(model.add_var(
                format!("gL1_t{}_a{a}", t + 1),
                VarCategory::Continuous,
                0.0,
                1.0,
            )?);
        }
        beta1.push(b_row);
        gamma_f1.push(f_row);
        gamma_l1.push(l_row);
        d_we.push(model.add_var(
            format!("dwe_t{}", t + 1),
            VarCategory::Continuous,
            0.0,
            f64::INFINITY,
        )?);
    }

    let multiblock = config.multiblock;
    let (mut alpha_hat, mut beta2, mut gamma_f2, mut gamma_l2, mut z_first, mut z_last) = (
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
    );
    if multiblock {
        for t in 0..num_t {
            alpha_hat.push(model.add_var(
                format!("ah_t{}", t + 1),
                VarCategory::Continuous,
                0.0,
                1.0,
            )?);
            let mut b_row = Vec::with_capacity(num_a);
            let mut f_row = Vec::with_capacity(num_a);
            let mut l_row = Vec::with_capacity(num_a);
            for a in 1..=num_a {
                b_row.push(model.add_var(
                    format!("b2_t{}_a{a}", t + 1),
                    VarCategory::Continuous,
                    0.0,
                    1.0,
                )?);
                f_row.push(model.add_var(
                    format!("gF2_t{}_a{a}", t + 1),
                    VarCategory::Continuous,
                    0.0,
                    1.0,
                )?);
                l_row.push(model.add_var(
                    format!("gL2_t{}_a{a}", t + 1),
                    VarCategory::Continuous,
                    0.0,
                    1.0,
                )?);
            }
            beta2.push(b_row);
            gamma_f2.push(f_row);
            gamma_l2.push(l_row);
            z_first.push(model.add_var(
                format!("zF_t{}", t + 1),
                VarCategory::Continuous,
                0.0,
                f64::INFINITY,
            )?);
            z_last.push(model.add_var(
                format!("zL_t{}", t + 1),
                VarCategory::Continuous,
                0.0,
                f64::INFINITY,
            )?);
        }
    }

    let parity = config.parity;
    let (mut y, mut w) = (Vec::new(), Vec::new());
    if parity {
        let w_hi = (num_a / 2) as f64;
        for t in 0..num_t {
            let mut y_row = Vec::with_capacity(num_b);
            let mut w_row = Vec::with_capacity(num_b);
            for b in 1..=num_b {
                y_row.push(model.add_var(
                    format!("y_t{}_b{b}", t + 1),
                    VarCategory::Continuous,
                    0.0,
                    1.0,
                )?);
                w_row.push(model.add_var(
                    format!("w_t{}_b{b}", t + 1),
                    int_or(t, VarCategory::Integer),
                    0.0,
                    w_hi,
                )?);
            }
            y.push(y_row);
            w.push(w_row);
        }
    }

    // Objective: aisle edges + origin legs + cross-aisle span (+ parity).
    for t in 0..num_t {
        for (ei, &len) in edge_len.iter().enumerate() {
            model.add_objective_term(x[t][ei], len);
        }
        for a in 0..num_a {
            model.add_objective_term(gamma_f1[t][a], d0[a]);
            model.add_objective_term(gamma_l1[t][a], d0[a]);
        }
        model.add_objective_term(d_we[t], 1.0);
        if parity {
            for b in 1..=num_b {
                let db = layout.min_block_subaisle(b).expect("valid block");
                model.add_objective_term(y[t][b - 1], db);
            }
        }
    }

    // Every order rides exactly one trolley.
    for (oi, _) in orders.iter().enumerate() {
        let terms = (0..num_t).map(|t| (z[oi][t], 1.0)).collect();
        model.add_constraint(format!("assign_o{}", oi + 1), terms, Sense::Eq, 1.0);
    }

    for t in 0..num_t {
        // Orders only on used trolleys, and used trolleys carry orders.
        for (oi, _) in orders.iter().enumerate() {
            model.add_constraint(
                format!("use_o{}_t{}", oi + 1, t + 1),
                alloc::vec![(z[oi][t], 1.0), (alpha[t], -1.0)],
                Sense::Le,
                0.0,
            );
        }
        let mut terms: Vec<(VarId, f64)> = alloc::vec![(alpha[t], 1.0)];
        terms.extend((0..orders.len()).map(|oi| (z[oi][t], -1.0)));
        model.add_constraint(format!("used_t{}", t + 1), terms, Sense::Le, 0.0);

        // Capacity: sum of baskets at most B on a used trolley.
        let mut terms: Vec<(VarId, f64)> = orders
            .iter()
            .enumerate()
            .map(|(oi, o)| (z[oi][t], f64::from(o.baskets)))
            .collect();
        terms.push((alpha[t], -f64::from(inst.capacity())));
        model.add_constraint(format!("cap_t{}", t + 1), terms, Sense::Le, 0.0);

        // Edges only on used trolleys; a used trolley traverses something.
        for (ei, &e) in edges.iter().enumerate() {
            model.add_constraint(
                format!("edge_use_t{}_a{}_b{}", t + 1, e.aisle, e.block),
                alloc::vec![(x[t][ei], 1.0), (alpha[t], -1.0)],
                Sense::Le,
                0.0,
            );
        }
        let mut terms: Vec<(VarId, f64)> = alloc::vec![(alpha[t], 1.0)];
        terms.extend((0..edges.len()).map(|ei| (x[t][ei], -1.0)));
        model.add_constraint(format!("active_t{}", t + 1), terms, Sense::Le, 0.0);

        // beta1 mirrors the block-1 edge of each aisle.
        for a in 1..=num_a {
            let ei = edges
                .iter()
                .position(|&e| e == SubaisleId::new(a, 1))
                .expect("block-1 edge");
            model.add_constraint(
                format!("b1_def_t{}_a{a}", t + 1),
                alloc::vec![(beta1[t][a - 1], 1.0), (x[t][ei], -1.0)],
                Sense::Eq,
                0.0,
            );
        }

        // First/last block-1 aisle markers.
        emit_extreme_aisle_rows(
            &mut model,
            &format!("1_t{}", t + 1),
            &beta1[t],
            &gamma_f1[t],
            &gamma_l1[t],
            alpha[t],
        );

        // Coverage: an assigned order's products must see a traversed edge.
        for (oi, o) in orders.iter().enumerate() {
            let prods = if config.prune_dominated {
                inst.pruned_products(o)
            } else {
                o.product_ids
                    .iter()
                    .filter_map(|pid| inst.product(pid))
                    .collect()
            };
            for (pi, p) in prods.into_iter().enumerate() {
                let mut terms: Vec<(VarId, f64)> = p
                    .edge_set()
                    .iter()
                    .map(|e| {
                        let ei = edges.iter().position(|x| x == e).expect("edge in layout");
                        (x[t][ei], 1.0)
                    })
                    .collect();
                terms.push((z[oi][t], -1.0));
                // The index keeps row names unique even when sanitized
                // product ids collide.
                model.add_constraint(
                    format!(
                        "cover_o{}_p{}_{}_t{}",
                        oi + 1,
                        pi + 1,
                        sanitize(&p.id),
                        t + 1
                    ),
                    terms,
                    Sense::Ge,
                    0.0,
                );
            }
        }

        if !multiblock {
            // D^WE covers the block-1 West-East span.
            let mut terms: Vec<(VarId, f64)> = alloc::vec![(d_we[t], 1.0)];
            for a in 0..num_a {
                terms.push((gamma_l1[t][a], -d1[a]));
                terms.push((gamma_f1[t][a], d1[a]));
            }
            model.add_constraint(format!("dwe_t{}", t + 1), terms, Sense::Ge, 0.0);
        } else {
            // Blocks beyond the first: alpha_hat flags their use.
            model.add_constraint(
                format!("ah_le_al_t{}", t + 1),
                alloc::vec![(alpha_hat[t], 1.0), (alpha[t], -1.0)],
                Sense::Le,
                0.0,
            );
            let mut sum_terms: Vec<(VarId, f64)> = alloc::vec![(alpha_hat[t], 1.0)];
            for (ei, &e) in edges.iter().enumerate() {
                if e.block >= 2 {
                    model.add_constraint(
                        format!("ah_ge_x_t{}_a{}_b{}", t + 1, e.aisle, e.block),
                        alloc::vec![(alpha_hat[t], 1.0), (x[t][ei], -1.0)],
                        Sense::Ge,
                        0.0,
                    );
                    sum_terms.push((x[t][ei], -1.0));
                }
            }
            model.add_constraint(format!("ah_sum_t{}", t + 1), sum_terms, Sense::Le, 0.0);

            // beta2: aisle visited in any later block.
            for a in 1..=num_a {
                model.add_constraint(
                    format!("b2_le_ah_t{}_a{a}", t + 1),
                    alloc::vec![(beta2[t][a - 1], 1.0), (alpha_hat[t], -1.0)],
                    Sense::Le,
                    0.0,
                );
                for (ei, &e) in edges.iter().enumerate() {
                    if e.aisle == a && e.block >= 2 {
                        model.add_constraint(
                            format!("b2_ge_x_t{}_a{a}_b{}", t + 1, e.block),
                            alloc::vec![(beta2[t][a - 1], 1.0), (x[t][ei], -1.0)],
                            Sense::Ge,
                            0.0,
                        );
                    }
                }
            }

            emit_extreme_aisle_rows(
                &mut model,
                &format!("2_t{}", t + 1),
                &beta2[t],
                &gamma_f2[t],
                &gamma_l2[t],
                alpha_hat[t],
            );

            // Extra Westward excursion: z^F >= 2*sum d1a(gF1 - gF2) - 2*d1(W_A)*(1 - ah).
            let big_m = 2.0 * d1[num_a - 1];
            let mut terms: Vec<(VarId, f64)> = alloc::vec![(z_first[t], 1.0)];
            for a in 0..num_a {
                terms.push((gamma_f1[t][a], -2.0 * d1[a]));
                terms.push((gamma_f2[t][a], 2.0 * d1[a]));
            }
            terms.push((alpha_hat[t], -big_m));
            model.add_constraint(format!("zF_t{}", t + 1), terms, Sense::Ge, -big_m);

            // Extra Eastward excursion: z^L >= 2*sum d1a(gL2 - gL1).
            let mut terms: Vec<(VarId, f64)> = alloc::vec![(z_last[t], 1.0)];
            for a in 0..num_a {
                terms.push((gamma_l2[t][a], -2.0 * d1[a]));
                terms.push((gamma_l1[t][a], 2.0 * d1[a]));
            }
            model.add_constraint(format!("zL_t{}", t + 1), terms, Sense::Ge, 0.0);

            // D^WE covers block-1 span plus both excursions.
            let mut terms: Vec<(VarId, f64)> = alloc::vec![(d_we[t], 1.0)];
            for a in 0..num_a {
                terms.push((gamma_l1[t][a], -d1[a]));
                terms.push((gamma_f1[t][a], d1[a]));
            }
            terms.push((z_first[t], -1.0));
            terms.push((z_last[t], -1.0));
            model.add_constraint(format!("dwe_t{}", t + 1), terms, Sense::Ge, 0.0);
        }

        if parity {
            // Edge count per block splits into twice an integer plus the odd bit.
            for b in 1..=num_b {
                let mut terms: Vec<(VarId, f64)> = edges
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.block == b)
                    .map(|(ei, _)| (x[t][ei], 1.0))
                    .collect();
                terms.push((w[t][b - 1], -2.0));
                terms.push((y[t][b - 1], -1.0));
                model.add_constraint(format!("parity_t{}_b{b}", t + 1), terms, Sense::Eq, 0.0);
            }
        }
    }

    // Symmetry breaking over the (sorted) order sequence.
    if config.symmetry != Symmetry::None {
        for oi in 0..orders.len().min(num_t) {
            let terms = (0..=oi).map(|t| (z[oi][t], 1.0)).collect();
            model.add_constraint(format!("sym_prefix_o{}", oi + 1), terms, Sense::Eq, 1.0);
            for t in (oi + 1)..num_t {
                model.add_constraint(
                    format!("sym_zero_o{}_t{}", oi + 1, t + 1),
                    alloc::vec![(z[oi][t], 1.0)],
                    Sense::Eq,
                    0.0,
                );
            }
        }
    }
    if config.symmetry == Symmetry::Strong {
        // Order o lands on trolley t when no earlier trolley took it and no
        // earlier order occupies t.
        for oi in 1..orders.len() {
            for t in 1..num_t {
                let mut terms: Vec<(VarId, f64)> = alloc::vec![(z[oi][t], 1.0)];
                for r in 0..t {
                    terms.push((z[oi][r], 1.0));
                }
                for q in 0..oi {
                    terms.push((z[q][t], 1.0));
                }
                model.add_constraint(
                    format!("sym_force_o{}_t{}", oi + 1, t + 1),
                    terms,
                    Sense::Ge,
                    1.0,
                );
            }
        }
    }

    let catalog = VariableCatalog {
        order_ids: orders.iter().map(|o| o.id.clone()).collect(),
        edges,
        num_trolleys: num_t,
        z,
        x,
        alpha,
        beta1,
        gamma_f1,
        gamma_l1,
        d_we,
        alpha_hat: multiblock.then_some(alpha_hat),
        beta2: multiblock.then_some(beta2),
        gamma_f2: multiblock.then_some(gamma_f2),
        gamma_l2: multiblock.then_some(gamma_l2),
        z_first: multiblock.then_some(z_first),
        z_last: multiblock.then_some(z_last),
        y: parity.then_some(y),
        w: parity.then_some(w),
    };

    if config.valid_inequalities {
        for c in build_valid_inequalities(inst, &catalog, config.multiblock) {
            model.add_constraint(c.name, c.terms, c.sense, c.rhs);
        }
    }

    Ok((model, catalog))
}

/// Rows defining the lowest (`gamma_f`) and highest (`gamma_l`) flagged
/// aisle of a `beta` family, gated by an activity variable.
#[allow(clippy::needless_range_loop)]
fn emit_extreme_aisle_rows(
    model: &mut MilpModel,
    suffix: &str,
    beta: &[VarId],
    gamma_f: &[VarId],
    gamma_l: &[VarId],
    active: VarId,
) {
    let num_a = beta.len();
    let mut terms: Vec<(VarId, f64)> = gamma_f.iter().map(|&v| (v, 1.0)).collect();
    terms.push((active, -1.0));
    model.add_constraint(format!("gF{suffix}_sum"), terms, Sense::Eq, 0.0);
    let mut terms: Vec<(VarId, f64)> = gamma_l.iter().map(|&v| (v, 1.0)).collect();
    terms.push((active, -1.0));
    model.add_constraint(format!("gL{suffix}_sum"), terms, Sense::Eq, 0.0);
    for a in 0..num_a {
        model.add_constraint(
            format!("gF{suffix}_le_a{}", a + 1),
            alloc::vec![(gamma_f[a], 1.0), (beta[a], -1.0)],
            Sense::Le,
            0.0,
        );
        model.add_constraint(
            format!("gL{suffix}_le_a{}", a + 1),
            alloc::vec![(gamma_l[a], 1.0), (beta[a], -1.0)],
            Sense::Le,
            0.0,
        );
        // Forced on when this aisle is flagged and none further West (East) is.
        let mut terms: Vec<(VarId, f64)> = alloc::vec![(gamma_f[a], 1.0), (beta[a], -1.0)];
        for e in 0..a {
            terms.push((beta[e], 1.0));
        }
        model.add_constraint(format!("gF{suffix}_lo_a{}", a + 1), terms, Sense::Ge, 0.0);
        let mut terms: Vec<(VarId, f64)> = alloc::vec![(gamma_l[a], 1.0), (beta[a], -1.0)];
        for e in (a + 1)..num_a {
            terms.push((beta[e], 1.0));
        }
        model.add_constraint(format!("gL{suffix}_hi_a{}", a + 1), terms, Sense::Ge, 0.0);
    }
}

/// The LP-strengthening inequalities: minimum trolley count, forced edges
/// for products pickable from a single subaisle, first/last-aisle covers,
/// and the cross-aisle span bound from single-subaisle products.
///
/// The span bound and the block-2 covers assume the multi-block `D^WE`; the
/// caller says whether those families apply.
#[allow(clippy::needless_range_loop)]
pub fn build_valid_inequalities(
    instance: &Instance,
    catalog: &VariableCatalog,
    multiblock: bool,
) -> Vec<ConstraintDef> {
    let layout = instance.layout();
    let num_t = catalog.num_trolleys;
    let num_a = layout.num_aisles();
    let capacity = u64::from(instance.capacity());
    let mut out = Vec::new();

    // At least ceil(total / B) trolleys run, so pin the first ones on.
    let forced = ceil_div(instance.total_baskets(), capacity) as usize;
    for t in 0..forced.min(num_t) {
        out.push(ConstraintDef {
            name: format!("vi_force_t{}", t + 1),
            terms: alloc::vec![(catalog.alpha[t], 1.0)],
            sense: Sense::Eq,
            rhs: 1.0,
        });
    }

    // Orders pinned to an edge by a single-subaisle product.
    let orders = order_list(instance, catalog);
    let mut phi: Vec<Vec<usize>> = alloc::vec![Vec::new(); catalog.edges.len()];
    for (oi, o) in orders.iter().enumerate() {
        let mut pinned: BTreeSet<SubaisleId> = BTreeSet::new();
        for pid in &o.product_ids {
            let p = instance.product(pid).expect("validated product");
            let q = p.edge_set();
            if q.len() == 1 {
                pinned.insert(*q.iter().next().expect("singleton"));
            }
        }
        for e in pinned {
            let ei = catalog.edge_index(e).expect("edge in catalog");
            phi[ei].push(oi);
        }
    }

    for (ei, members) in phi.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let total: u64 = members
            .iter()
            .map(|&oi| u64::from(orders[oi].baskets))
            .sum();
        let denom = capacity.min(total) as f64;
        let e = catalog.edges[ei];
        for t in 0..num_t {
            let mut terms: Vec<(VarId, f64)> = alloc::vec![(catalog.x[t][ei], denom)];
            for &oi in members {
                terms.push((catalog.z[oi][t], -f64::from(orders[oi].baskets)));
            }
            out.push(ConstraintDef {
                name: format!("vi_pin_t{}_a{}_b{}", t + 1, e.aisle, e.block),
                terms,
                sense: Sense::Ge,
                rhs: 0.0,
            });
        }
        out.push(ConstraintDef {
            name: format!("vi_agg_a{}_b{}", e.aisle, e.block),
            terms: (0..num_t).map(|t| (catalog.x[t][ei], 1.0)).collect(),
            sense: Sense::Ge,
            rhs: ceil_div(total, capacity) as f64,
        });
    }

    // A flagged aisle needs a first marker on or West of it and a last
    // marker on or East of it.
    let mut covers = alloc::vec![(&catalog.beta1, &catalog.gamma_f1, &catalog.gamma_l1, "1")];
    if multiblock {
        if let (Some(b2), Some(f2), Some(l2)) =
            (&catalog.beta2, &catalog.gamma_f2, &catalog.gamma_l2)
        {
            covers.push((b2, f2, l2, "2"));
        }
    }
    for (beta, gf, gl, tag) in covers {
        for t in 0..num_t {
            for a in 0..num_a {
                let mut terms: Vec<(VarId, f64)> = alloc::vec![(beta[t][a], 1.0)];
                for e in a..num_a {
                    terms.push((gl[t][e], -1.0));
                }
                out.push(ConstraintDef {
                    name: format!("vi_last{tag}_t{}_a{}", t + 1, a + 1),
                    terms,
                    sense: Sense::Le,
                    rhs: 0.0,
                });
                let mut terms: Vec<(VarId, f64)> = alloc::vec![(beta[t][a], 1.0)];
                for e in 0..=a {
                    terms.push((gf[t][e], -1.0));
                }
                out.push(ConstraintDef {
                    name: format!("vi_first{tag}_t{}_a{}", t + 1, a + 1),
                    terms,
                    sense: Sense::Le,
                    rhs: 0.0,
                });
            }
        }
    }

    // Orders whose single-subaisle products span several aisles force that
    // span onto D^WE. Only sound once D^WE sees blocks past the first.
    if multiblock {
        for (oi, o) in orders.iter().enumerate() {
            let mut aisles: BTreeSet<usize> = BTreeSet::new();
            for pid in &o.product_ids {
                let p = instance.product(pid).expect("validated product");
                let q = p.edge_set();
                if q.len() == 1 {
                    aisles.insert(q.iter().next().expect("singleton").aisle);
                }
            }
            if aisles.len() < 2 {
                continue;
            }
            let rho = *aisles.iter().next().expect("nonempty");
            let sigma = *aisles.iter().next_back().expect("nonempty");
            let span = layout.cross_distance(rho, sigma).expect("valid aisles");
            for t in 0..num_t {
                out.push(ConstraintDef {
                    name: format!("vi_span_o{}_t{}", oi + 1, t + 1),
                    terms: alloc::vec![(catalog.d_we[t], 1.0), (catalog.z[oi][t], -span)],
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
            }
        }
    }

    out
}

fn order_list<'a>(instance: &'a Instance, catalog: &VariableCatalog) -> Vec<&'a Order> {
    catalog
        .order_ids
        .iter()
        .map(|id| instance.order(id).expect("order in instance"))
        .collect()
}

/// Reads the batching out of an integral solution: each order goes to the
/// unique trolley whose `z` is one.
pub fn extract_batching(
    catalog: &VariableCatalog,
    result: &SolveResult,
) -> Result<Batching, ExtractError> {
    if !result.has_values() {
        return Err(ExtractError::NoValues);
    }
    let mut batching = Batching::default();
    for (oi, oid) in catalog.order_ids.iter().enumerate() {
        let mut chosen = Vec::new();
        for t in 0..catalog.num_trolleys {
            let v = result.value(catalog.z[oi][t]);
            if !crate::util::is_integral(v, crate::milp::INTEGRALITY_TOL) {
                return Err(ExtractError::Fractional {
                    order: oid.clone(),
                    trolley: t + 1,
                    value: v,
                });
            }
            if round_to_i64(v) == 1 {
                chosen.push(t + 1);
            }
        }
        if chosen.len() != 1 {
            return Err(ExtractError::NotExactlyOne {
                order: oid.clone(),
                count: chosen.len(),
            });
        }
        batching.assign(oid, chosen[0]);
    }
    Ok(batching)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuditError {
    #[error("order \"{0}\" not assigned to exactly one trolley")]
    AssignmentViolated(String),
    #[error("trolley {trolley} loaded with {load} baskets, capacity {capacity}")]
    CapacityViolated {
        trolley: usize,
        load: u64,
        capacity: u32,
    },
    #[error("order \"{order}\" on trolley {trolley}: product \"{product}\" has no traversed edge")]
    CoverageViolated {
        order: String,
        trolley: usize,
        product: String,
    },
    #[error("trolley {trolley}, block {block}: {edges} edges but parity bit {bit}")]
    ParityViolated {
        trolley: usize,
        block: usize,
        edges: u64,
        bit: i64,
    },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Audits a solution against the constraints that define feasibility:
/// exactly-one assignment, capacity, coverage, and (when the parity term was
/// built) the block parity split.
#[allow(clippy::needless_range_loop)]
pub fn audit_solution(
    instance: &Instance,
    catalog: &VariableCatalog,
    result: &SolveResult,
) -> Result<(), AuditError> {
    let orders = order_list(instance, catalog);
    let mut loads = alloc::vec![0u64; catalog.num_trolleys];
    for (oi, o) in orders.iter().enumerate() {
        let mut assigned = Vec::new();
        for t in 0..catalog.num_trolleys {
            if result.integral_value(catalog.z[oi][t])? == 1 {
                assigned.push(t);
            }
        }
        if assigned.len() != 1 {
            return Err(AuditError::AssignmentViolated(o.id.clone()));
        }
        let t = assigned[0];
        loads[t] += u64::from(o.baskets);

        for pid in &o.product_ids {
            let p = instance.product(pid).expect("validated product");
            let covered = p.edge_set().iter().any(|e| {
                let ei = catalog.edge_index(*e).expect("edge in catalog");
                result.value(catalog.x[t][ei]) > 0.5
            });
            if !covered {
                return Err(AuditError::CoverageViolated {
                    order: o.id.clone(),
                    trolley: t + 1,
                    product: pid.clone(),
                });
            }
        }
    }
    for (t, &load) in loads.iter().enumerate() {
        if load > u64::from(instance.capacity()) {
            return Err(AuditError::CapacityViolated {
                trolley: t + 1,
                load,
                capacity: instance.capacity(),
            });
        }
    }

    if let Some(y) = &catalog.y {
        for t in 0..catalog.num_trolleys {
            for b in 1..=instance.layout().num_blocks() {
                let mut count = 0u64;
                for (ei, e) in catalog.edges.iter().enumerate() {
                    if e.block == b && result.integral_value(catalog.x[t][ei])? == 1 {
                        count += 1;
                    }
                }
                let bit = result.integral_value(y[t][b - 1])?;
                if count % 2 != bit as u64 % 2 {
                    return Err(AuditError::ParityViolated {
                        trolley: t + 1,
                        block: b,
                        edges: count,
                        bit,
                    });
                }
            }
        }
    }
    Ok(())
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}
