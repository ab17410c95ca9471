use std::fmt;

use sds_core::analysis::AnalysisError;
use sds_core::correlation::CorrelationError;
use sds_core::fragility::FragilityError;
use sds_core::grid::GridError;
use sds_core::ingest::IngestError;
use sds_core::sampler::SamplerError;
use sds_core::ucmodel::UcError;
use sds_core::windfield::WindError;

/// Process exit codes.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Solver(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage error", m),
            CliError::Data(m) => ("data error", m),
            CliError::Solver(m) => ("solver error", m),
            CliError::Internal(m) => ("internal error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<WindError> for CliError {
    fn from(e: WindError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<FragilityError> for CliError {
    fn from(e: FragilityError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Correlation { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<CorrelationError> for CliError {
    fn from(e: CorrelationError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<UcError> for CliError {
    fn from(e: UcError) -> Self {
        let msg = e.to_string();
        match e {
            UcError::Instance(_) | UcError::Grid(_) | UcError::Format(_) => CliError::Data(msg),
            UcError::Infeasible { .. } | UcError::TimeLimitNoIncumbent | UcError::Solver(_) => CliError::Solver(msg),
            UcError::PlanInvariant(_) | UcError::Internal(_) => CliError::Internal(msg),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Uc(u) => u.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}
