//! Embedded MILP backend: maps models onto the `microlp` simplex plus
//! branch-and-bound engine, so nothing external is needed to solve.

use std::time::{Duration, Instant};

use microlp::{ComparisonOp, OptimizationDirection, SolveOutcome, TerminationReason};
use pickbatch_core::milp::{
    MilpModel, Sense, SolveError, SolveResult, SolveStatus, Solver, VarCategory,
};

/// Pure-Rust solver; the default backend for every command and test.
#[derive(Clone, Debug, Default)]
pub struct BuiltinSolver {
    pub time_limit: Option<Duration>,
}

impl BuiltinSolver {
    pub fn new() -> Self {
        BuiltinSolver::default()
    }

    pub fn with_time_limit(limit: Duration) -> Self {
        BuiltinSolver {
            time_limit: Some(limit),
        }
    }
}

fn int_bound(x: f64, fallback: i32) -> i32 {
    if x.is_finite() {
        x.round() as i32
    } else {
        fallback
    }
}

impl Solver for BuiltinSolver {
    fn solve(&self, model: &MilpModel) -> Result<SolveResult, SolveError> {
        let start = Instant::now();
        let mut problem = microlp::Problem::new(OptimizationDirection::Minimize);
        let obj = model.objective_dense();
        let vars: Vec<microlp::Variable> = model
            .vars()
            .iter()
            .enumerate()
            .map(|(i, v)| match v.category {
                VarCategory::Continuous => problem.add_var(obj[i], (v.lower, v.upper)),
                VarCategory::Binary => problem.add_integer_var(obj[i], (0, 1)),
                VarCategory::Integer => problem.add_integer_var(
                    obj[i],
                    (
                        int_bound(v.lower, i32::MIN / 2),
                        int_bound(v.upper, i32::MAX / 2),
                    ),
                ),
            })
            .collect();
        for c in model.constraints() {
            // microlp rejects repeated variables in one expression; fold first.
            let mut dense: std::collections::BTreeMap<usize, f64> = Default::default();
            for &(v, coeff) in &c.terms {
                *dense.entry(v.index()).or_insert(0.0) += coeff;
            }
            let expr: Vec<(microlp::Variable, f64)> = dense
                .into_iter()
                .map(|(i, coeff)| (vars[i], coeff))
                .collect();
            let op = match c.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Eq => ComparisonOp::Eq,
                Sense::Ge => ComparisonOp::Ge,
            };
            problem.add_constraint(expr, op, c.rhs);
        }
        if let Some(limit) = self.time_limit {
            problem.set_time_limit(limit);
        }

        match problem.solve() {
            Ok(SolveOutcome::Solution(sol)) => {
                let status = match sol.termination_reason() {
                    TerminationReason::ProvenOptimal => SolveStatus::Optimal,
                    TerminationReason::TimeLimit => SolveStatus::Timeout,
                    _ => SolveStatus::Feasible,
                };
                let stats = sol.stats();
                let result = SolveResult {
                    status,
                    objective_value: Some(sol.objective()),
                    values: vars.iter().map(|&v| sol.var_value_raw(v)).collect(),
                    best_bound: stats.best_bound,
                    node_count: Some(stats.nodes_solved),
                    wall_time_secs: start.elapsed().as_secs_f64(),
                };
                result.check_against(model)?;
                Ok(result)
            }
            Ok(SolveOutcome::Interrupted(_)) => Err(SolveError::TimeoutNoIncumbent),
            Err(microlp::Error::Infeasible) => Ok(SolveResult {
                status: SolveStatus::Infeasible,
                objective_value: None,
                values: Vec::new(),
                best_bound: None,
                node_count: None,
                wall_time_secs: start.elapsed().as_secs_f64(),
            }),
            Err(microlp::Error::Unbounded) => Ok(SolveResult {
                status: SolveStatus::Unbounded,
                objective_value: None,
                values: Vec::new(),
                best_bound: None,
                node_count: None,
                wall_time_secs: start.elapsed().as_secs_f64(),
            }),
            Err(e) => Err(SolveError::Backend(e.to_string())),
        }
    }
}
