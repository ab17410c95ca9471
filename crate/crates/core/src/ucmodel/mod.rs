//! Two-stage stochastic unit commitment with DC network and line outages.

mod backend;
mod milp;
mod suc;

pub use backend::{
    diagnose_infeasibility, BackendKind, BackendOptions, ExhaustiveBackend, HighsBackend, MilpBackend, MilpSolution,
    SolveStatus,
};
pub use milp::{Constraint, ConstraintClass, MilpModel, Sense, VarKind, Variable};
pub use suc::{
    build_suc, dispatch_fixed, evaluate_plan, solve_suc, CommitmentPlan, CostBreakdown, CostRow, CostTable,
    DispatchResult, SolveOptions, SucLayout, SucSolution, COST_CSV_HEADER,
};

use thiserror::Error;

use crate::grid::GridError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UcError {
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("model infeasible{}", match .class { Some(c) => format!(" (dropping {c:?} constraints restores feasibility)"), None => String::new() })]
    Infeasible { class: Option<ConstraintClass> },
    #[error("time limit reached without an incumbent")]
    TimeLimitNoIncumbent,
    #[error("solver error: {0}")]
    Solver(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("plan invariant violated: {0}")]
    PlanInvariant(String),
    #[error("internal error: {0}")]
    Internal(String),
}
