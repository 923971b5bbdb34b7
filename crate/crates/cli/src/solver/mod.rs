//! Solver backends implementing [`pickbatch_core::milp::Solver`].

mod builtin;
mod subprocess;

pub use builtin::BuiltinSolver;
pub use subprocess::{parser_for, BackendConfig, ParsedSolution, SolutionParser, SubprocessSolver};

use pickbatch_core::milp::{MilpModel, SolveError, SolveResult, Solver};

/// Runtime choice between the embedded solver and an external command.
#[derive(Clone, Debug)]
pub enum AnySolver {
    Builtin(BuiltinSolver),
    Subprocess(SubprocessSolver),
}

impl Solver for AnySolver {
    fn solve(&self, model: &MilpModel) -> Result<SolveResult, SolveError> {
        match self {
            AnySolver::Builtin(s) => s.solve(model),
            AnySolver::Subprocess(s) => s.solve(model),
        }
    }
}
