//! MILP solver backends.

use std::num::NonZeroU32;
use std::path::Path;

use highs::{HighsModelStatus, RowProblem};
use serde::{Deserialize, Serialize};

use super::milp::{MilpModel, Sense, VarKind};
use super::UcError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Time limit hit with an incumbent; the gap is reported alongside.
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub mip_gap: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackendOptions {
    pub mip_rel_gap: f64,
    pub time_limit: Option<f64>,
}

impl Default for BackendOptions {
    fn default() -> Self {
        Self {
            mip_rel_gap: 1e-9,
            time_limit: None,
        }
    }
}

pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(&self, model: &MilpModel, opts: &BackendOptions) -> Result<MilpSolution, UcError>;

    /// Solve a model stored as free MPS.
    fn solve_file(&self, path: &Path, opts: &BackendOptions) -> Result<MilpSolution, UcError> {
        let text = std::fs::read_to_string(path).map_err(|e| UcError::Format(format!("{}: {e}", path.display())))?;
        self.solve(&MilpModel::from_mps(&text)?, opts)
    }
}

/// Names the constraint class whose removal restores feasibility.
pub fn diagnose_infeasibility(backend: &dyn MilpBackend, model: &MilpModel, opts: &BackendOptions) -> UcError {
    for class in model.classes() {
        match backend.solve(&model.without_class(class), opts) {
            Ok(_) => return UcError::Infeasible { class: Some(class) },
            Err(UcError::Infeasible { .. }) => continue,
            Err(e) => return e,
        }
    }
    UcError::Infeasible { class: None }
}

/// In-process HiGHS.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

fn bounds(lb: f64, ub: f64) -> (std::ops::Bound<f64>, std::ops::Bound<f64>) {
    use std::ops::Bound::*;
    let lo = if lb == f64::NEG_INFINITY { Unbounded } else { Included(lb) };
    let hi = if ub == f64::INFINITY { Unbounded } else { Included(ub) };
    (lo, hi)
}

impl MilpBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, opts: &BackendOptions) -> Result<MilpSolution, UcError> {
        let mut pb = RowProblem::default();
        let cols: Vec<_> = model
            .vars
            .iter()
            .map(|v| pb.add_column_with_integrality(v.obj, bounds(v.lb, v.ub), v.kind == VarKind::Binary))
            .collect();
        for c in &model.cons {
            let factors: Vec<_> = c.coeffs.iter().map(|&(j, a)| (cols[j], a)).collect();
            let (lb, ub) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            pb.add_row(bounds(lb, ub), &factors);
        }
        let mut m = pb.optimise(highs::Sense::Minimise);
        m.make_quiet();
        m.set_threads(NonZeroU32::new(1).expect("nonzero"));
        m.set_option("random_seed", 0);
        m.set_option("mip_rel_gap", opts.mip_rel_gap);
        if let Some(t) = opts.time_limit {
            m.set_option("time_limit", t);
        }
        let solved = m.try_solve().map_err(|e| UcError::Solver(format!("highs: {e:?}")))?;
        let is_mip = model.vars.iter().any(|v| v.kind == VarKind::Binary);
        let status = match solved.status() {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::ModelEmpty => {
                return Ok(MilpSolution {
                    status: SolveStatus::Optimal,
                    objective: 0.0,
                    mip_gap: 0.0,
                    values: Vec::new(),
                })
            }
            HighsModelStatus::ReachedTimeLimit
                if solved.primal_solution_status() == highs::HighsSolutionStatus::Feasible =>
            {
                SolveStatus::TimeLimit
            }
            HighsModelStatus::ReachedTimeLimit => return Err(UcError::TimeLimitNoIncumbent),
            HighsModelStatus::Infeasible => return Err(UcError::Infeasible { class: None }),
            other => return Err(UcError::Solver(format!("highs status {other:?}"))),
        };
        let mut values = solved.get_solution().columns().to_vec();
        for (x, v) in values.iter_mut().zip(&model.vars) {
            if v.kind == VarKind::Binary {
                *x = x.round();
            }
        }
        Ok(MilpSolution {
            status,
            objective: model.objective(&values),
            mip_gap: if is_mip { solved.mip_gap().max(0.0) } else { 0.0 },
            values,
        })
    }
}

/// Enumerates every assignment of the model's primary binaries and solves
/// what remains with HiGHS. Exact but exponential.
#[derive(Debug, Clone, Copy)]
pub struct ExhaustiveBackend {
    pub max_binaries: usize,
}

impl Default for ExhaustiveBackend {
    fn default() -> Self {
        Self { max_binaries: 16 }
    }
}

impl MilpBackend for ExhaustiveBackend {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn solve(&self, model: &MilpModel, _opts: &BackendOptions) -> Result<MilpSolution, UcError> {
        let primary = if model.primary.is_empty() {
            model.binaries()
        } else {
            model.primary.clone()
        };
        if primary.len() > self.max_binaries {
            return Err(UcError::Solver(format!(
                "exhaustive backend limited to {} binaries, model has {}",
                self.max_binaries,
                primary.len()
            )));
        }
        let lp_opts = BackendOptions::default();
        let mut best: Option<MilpSolution> = None;
        for mask in 0u64..(1u64 << primary.len()) {
            let mut fixed = model.clone();
            let mut admissible = true;
            for (bit, &j) in primary.iter().enumerate() {
                let x = ((mask >> bit) & 1) as f64;
                let v = &mut fixed.vars[j];
                if x < v.lb || x > v.ub {
                    admissible = false;
                    break;
                }
                v.lb = x;
                v.ub = x;
            }
            if !admissible {
                continue;
            }
            let sol = match HighsBackend.solve(&fixed, &lp_opts) {
                Ok(s) => s,
                Err(UcError::Infeasible { .. }) => continue,
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|b| sol.objective < b.objective) {
                best = Some(sol);
            }
        }
        let mut best = best.ok_or(UcError::Infeasible { class: None })?;
        for (x, v) in best.values.iter_mut().zip(&model.vars) {
            if v.kind == VarKind::Binary {
                *x = x.round();
            }
        }
        best.objective = model.objective(&best.values);
        Ok(best)
    }
}

/// Backend choice in configuration files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Highs,
    Exhaustive,
}

impl BackendKind {
    pub fn instance(self) -> Box<dyn MilpBackend> {
        match self {
            BackendKind::Highs => Box::new(HighsBackend),
            BackendKind::Exhaustive => Box::new(ExhaustiveBackend::default()),
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = UcError;

    fn from_str(s: &str) -> Result<Self, UcError> {
        match s {
            "highs" => Ok(BackendKind::Highs),
            "exhaustive" => Ok(BackendKind::Exhaustive),
            other => Err(UcError::Format(format!("unknown backend '{other}'"))),
        }
    }
}
