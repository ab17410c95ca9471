//! File formats, content hashes and canned cases.
//!
//! Every file carries a schema version. Angles are stored in degrees and
//! converted to radians on load; other units are declared in each file.

mod files;
mod toy;

pub use files::{
    grid_from_json, grid_to_json, load_grid, load_plan, load_pool, load_selection, load_track, plan_from_json,
    plan_to_json, pool_from_jsonl, pool_to_jsonl, save_grid, save_plan, save_pool, save_selection, save_track,
    selection_from_json, selection_to_json, track_from_csv, track_to_csv, PlanFile, SelectedScenario, SelectionFile,
    GRID_UNITS, TRACK_COLUMNS,
};
pub use toy::{make_toy_case, segments_within_rmax_at_peak, BundleConfig, CaseBundle, RING6_CUT, TOY_CASES};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Version written into, and required of, every file.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported schema_version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("{field}: unit '{found}' where '{expected}' is expected")]
    Unit {
        field: String,
        found: String,
        expected: String,
    },
    #[error("unknown toy case '{0}' (expected one of micro2, ring6, coastal12)")]
    UnknownCase(String),
}

pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> IngestError {
    IngestError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// SHA-256 of the canonical JSON form of a value.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable value");
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of raw bytes.
pub fn bytes_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_text(path: &std::path::Path, text: &str) -> Result<(), IngestError> {
    std::fs::write(path, text).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}
