//! Solver-agnostic linear model, solution payload and the backend trait.
//!
//! Models are built once and stay immutable; backends live in the companion
//! crate (an embedded simplex/branch-and-bound solver and an external-process
//! driver) and plug in through [`Solver`]. [`MilpModel::write_mps`] renders
//! free-format MPS for the external route.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::util::{fabs, is_integral, round_to_i64};

pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarCategory {
    Continuous,
    Binary,
    Integer,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Handle into a model's variable list.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
pub struct VarDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub category: VarCategory,
}

#[derive(Clone, Debug)]
pub struct ConstraintDef {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("variable name \"{0}\" declared twice")]
    DuplicateVariable(String),
    #[error("variable name \"{0}\" exceeds 64 characters")]
    NameTooLong(String),
    #[error("MPS name collision after sanitization: {0}")]
    MpsNameCollision(String),
}

/// A minimization MILP: variables with bounds and categories, linear
/// constraints, and a linear objective.
#[derive(Clone, Debug, Default)]
pub struct MilpModel {
    pub name: String,
    vars: Vec<VarDef>,
    var_names: BTreeMap<String, VarId>,
    constraints: Vec<ConstraintDef>,
    objective: Vec<(VarId, f64)>,
}

impl MilpModel {
    pub fn new(name: &str) -> Self {
        MilpModel {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn add_var(
        &mut self,
        name: String,
        category: VarCategory,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, ModelError> {
        if name.len() > 64 {
            return Err(ModelError::NameTooLong(name));
        }
        if self.var_names.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        let (lower, upper) = match category {
            VarCategory::Binary => (0.0, 1.0),
            _ => (lower, upper),
        };
        let id = VarId(self.vars.len());
        self.var_names.insert(name.clone(), id);
        self.vars.push(VarDef {
            name,
            lower,
            upper,
            category,
        });
        Ok(id)
    }

    pub fn add_constraint(
        &mut self,
        name: String,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        self.constraints.push(ConstraintDef {
            name,
            terms,
            sense,
            rhs,
        });
    }

    /// Adds `coeff * var` to the (minimized) objective.
    pub fn add_objective_term(&mut self, var: VarId, coeff: f64) {
        self.objective.push((var, coeff));
    }

    pub fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &VarDef {
        &self.vars[id.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn constraints(&self) -> &[ConstraintDef] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    /// Objective coefficient per variable (terms folded together).
    pub fn objective_dense(&self) -> Vec<f64> {
        let mut c = alloc::vec![0.0; self.vars.len()];
        for &(v, coeff) in &self.objective {
            c[v.0] += coeff;
        }
        c
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Copy with every integrality requirement dropped: binaries and integers
    /// become continuous within their bounds.
    pub fn relaxed(&self) -> MilpModel {
        let mut out = self.clone();
        for v in &mut out.vars {
            v.category = VarCategory::Continuous;
        }
        out
    }

    pub fn has_integer_vars(&self) -> bool {
        self.vars
            .iter()
            .any(|v| v.category != VarCategory::Continuous)
    }

    /// Renders free-format MPS: NAME, ROWS, COLUMNS (integers bracketed by
    /// INTORG/INTEND markers), RHS, BOUNDS, ENDATA, all in declaration order.
    pub fn write_mps(&self) -> Result<String, ModelError> {
        let mut seen = alloc::collections::BTreeSet::new();
        let col_names: Vec<String> = self
            .vars
            .iter()
            .map(|v| sanitize_mps_name(&v.name))
            .collect();
        for n in &col_names {
            if !seen.insert(n.clone()) {
                return Err(ModelError::MpsNameCollision(n.clone()));
            }
        }
        let row_names: Vec<String> = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let base = sanitize_mps_name(&c.name);
                if base.is_empty() {
                    format!("R{i}")
                } else {
                    base
                }
            })
            .collect();
        let mut row_seen = alloc::collections::BTreeSet::new();
        for n in &row_names {
            if !row_seen.insert(n.clone()) {
                return Err(ModelError::MpsNameCollision(n.clone()));
            }
        }

        let mut out = String::new();
        let model_name = {
            let n = sanitize_mps_name(&self.name);
            if n.is_empty() {
                "MODEL".to_string()
            } else {
                n
            }
        };
        let _ = writeln!(out, "NAME {model_name}");
        let _ = writeln!(out, "ROWS");
        let _ = writeln!(out, " N OBJ");
        for (c, name) in self.constraints.iter().zip(&row_names) {
            let tag = match c.sense {
                Sense::Le => 'L',
                Sense::Eq => 'E',
                Sense::Ge => 'G',
            };
            let _ = writeln!(out, " {tag} {name}");
        }

        // Column-major coefficient lists in declaration order.
        let obj = self.objective_dense();
        let mut col_rows: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); self.vars.len()];
        for (ri, c) in self.constraints.iter().enumerate() {
            let mut folded: BTreeMap<usize, f64> = BTreeMap::new();
            for &(v, coeff) in &c.terms {
                *folded.entry(v.0).or_insert(0.0) += coeff;
            }
            for (v, coeff) in folded {
                if coeff != 0.0 {
                    col_rows[v].push((ri, coeff));
                }
            }
        }

        let _ = writeln!(out, "COLUMNS");
        let mut in_integer_block = false;
        let mut marker = 0usize;
        for (vi, v) in self.vars.iter().enumerate() {
            let integral = v.category != VarCategory::Continuous;
            if integral && !in_integer_block {
                let _ = writeln!(out, " MARKER{marker} 'MARKER' 'INTORG'");
                marker += 1;
                in_integer_block = true;
            }
            if !integral && in_integer_block {
                let _ = writeln!(out, " MARKER{marker} 'MARKER' 'INTEND'");
                marker += 1;
                in_integer_block = false;
            }
            // A column must appear somewhere to exist; give coefficient-free
            // variables an explicit zero objective entry.
            if obj[vi] != 0.0 || col_rows[vi].is_empty() {
                let _ = writeln!(out, " {} OBJ {}", col_names[vi], fmt_num(obj[vi]));
            }
            for &(ri, coeff) in &col_rows[vi] {
                let _ = writeln!(
                    out,
                    " {} {} {}",
                    col_names[vi],
                    row_names[ri],
                    fmt_num(coeff)
                );
            }
        }
        if in_integer_block {
            let _ = writeln!(out, " MARKER{marker} 'MARKER' 'INTEND'");
        }

        let _ = writeln!(out, "RHS");
        for (c, name) in self.constraints.iter().zip(&row_names) {
            if c.rhs != 0.0 {
                let _ = writeln!(out, " RHS {} {}", name, fmt_num(c.rhs));
            }
        }

        let _ = writeln!(out, "BOUNDS");
        for (vi, v) in self.vars.iter().enumerate() {
            let name = &col_names[vi];
            match v.category {
                VarCategory::Binary => {
                    let _ = writeln!(out, " BV BND {name}");
                }
                _ => {
                    if v.lower == v.upper {
                        let _ = writeln!(out, " FX BND {name} {}", fmt_num(v.lower));
                        continue;
                    }
                    if v.lower != 0.0 {
                        if v.lower == f64::NEG_INFINITY {
                            let _ = writeln!(out, " MI BND {name}");
                        } else {
                            let _ = writeln!(out, " LO BND {name} {}", fmt_num(v.lower));
                        }
                    }
                    if v.upper != f64::INFINITY {
                        let _ = writeln!(out, " UP BND {name} {}", fmt_num(v.upper));
                    }
                }
            }
        }
        let _ = writeln!(out, "ENDATA");
        Ok(out)
    }
}

/// Shortest decimal that round-trips through `f64` parsing.
fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn sanitize_mps_name(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolveStatus {
    Optimal,
    /// Incumbent available but optimality not proven.
    Feasible,
    Infeasible,
    Unbounded,
    /// Hit the time limit with an incumbent in hand.
    Timeout,
}

/// Outcome of a solve: status, objective, and one value per variable.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective_value: Option<f64>,
    pub values: Vec<f64>,
    pub best_bound: Option<f64>,
    pub node_count: Option<u64>,
    pub wall_time_secs: f64,
}

impl SolveResult {
    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }

    pub fn has_values(&self) -> bool {
        matches!(
            self.status,
            SolveStatus::Optimal | SolveStatus::Feasible | SolveStatus::Timeout
        ) && !self.values.is_empty()
    }

    /// Rounds an integral variable's value, failing when it is fractional.
    pub fn integral_value(&self, var: VarId) -> Result<i64, SolveError> {
        let x = self.value(var);
        if !is_integral(x, INTEGRALITY_TOL) {
            return Err(SolveError::FractionalValue {
                index: var.0,
                value: x,
            });
        }
        Ok(round_to_i64(x))
    }

    /// Internal consistency: objective matches `c·x` and integer-category
    /// variables are integral.
    pub fn check_against(&self, model: &MilpModel) -> Result<(), SolveError> {
        if let Some(obj) = self.objective_value {
            let recomputed = model.objective_value(&self.values);
            if fabs(obj - recomputed) > 1e-6 * (1.0 + fabs(obj)) {
                return Err(SolveError::ObjectiveMismatch {
                    reported: obj,
                    recomputed,
                });
            }
        }
        for (i, v) in model.vars().iter().enumerate() {
            if v.category != VarCategory::Continuous
                && !is_integral(self.values[i], INTEGRALITY_TOL)
            {
                return Err(SolveError::FractionalValue {
                    index: i,
                    value: self.values[i],
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("solver backend failed: {0}")]
    Backend(String),
    #[error("could not parse solver output: {0}")]
    Unparsable(String),
    #[error("time limit reached without an incumbent")]
    TimeoutNoIncumbent,
    #[error("no solution values available (status {0:?})")]
    NoSolution(SolveStatus),
    #[error("variable {index} should be integral but is {value}")]
    FractionalValue { index: usize, value: f64 },
    #[error("reported objective {reported} disagrees with recomputed {recomputed}")]
    ObjectiveMismatch { reported: f64, recomputed: f64 },
    #[error("model error: {0}")]
    Model(#[from] ModelError),
}

/// A MILP backend. Implementations must honor variable categories and
/// bounds; [`solve_relaxation`](Solver::solve_relaxation) drops integrality.
pub trait Solver {
    fn solve(&self, model: &MilpModel) -> Result<SolveResult, SolveError>;

    fn solve_relaxation(&self, model: &MilpModel) -> Result<SolveResult, SolveError> {
        self.solve(&model.relaxed())
    }
}

impl<T: Solver + ?Sized> Solver for &T {
    fn solve(&self, model: &MilpModel) -> Result<SolveResult, SolveError> {
        (**self).solve(model)
    }

    fn solve_relaxation(&self, model: &MilpModel) -> Result<SolveResult, SolveError> {
        (**self).solve_relaxation(model)
    }
}
