//! Pool statistics, severity and scenario selection.

mod select;
mod tail;

pub use select::{decile_strata, kendall_tau, select, SelectionRule, WeightedSelection, STRATA};
pub use tail::{
    excess_kurtosis, faulted_count_distribution, faulted_counts, hill_alpha, mean, mean_median_ratio, median,
    tail_report, Estimate, HillConfig, TailRow, TAIL_CSV_HEADER,
};

use thiserror::Error;

use crate::fragility::fragility_prob;
use crate::grid::GridCase;
use crate::sampler::{ScenarioOutage, ScenarioPool};
use crate::ucmodel::{self, SolveOptions, UcError};
use crate::windfield::{total_wind_speed, HurricaneTrack};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("timestep {t} outside horizon {horizon}")]
    TimestepOutOfRange { t: usize, horizon: usize },
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Uc(#[from] UcError),
}

/// Proxy severity weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyWeighting {
    /// Number of distinct failed lines.
    #[default]
    Count,
    /// Sum of flow limits of failed lines.
    FlowLimit,
}

/// `q̂(s)`: distinct lines failed at any time in the horizon.
pub fn proxy_severity(outage: &ScenarioOutage, line_weights: Option<&[f64]>) -> f64 {
    outage
        .line_fail
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_some())
        .map(|(l, _)| line_weights.map_or(1.0, |w| w[l]))
        .sum()
}

/// `q̂` for every scenario of a pool.
pub fn pool_proxy_severity(pool: &ScenarioPool, grid: Option<&GridCase>, weighting: ProxyWeighting) -> Vec<f64> {
    let weights: Option<Vec<f64>> = match (weighting, grid) {
        (ProxyWeighting::FlowLimit, Some(g)) => Some(g.lines.iter().map(|l| l.flow_limit).collect()),
        _ => None,
    };
    pool.outages().iter().map(|o| proxy_severity(o, weights.as_deref())).collect()
}

/// Timestep with the largest expected number of segment failures under the
/// predicted track.
pub fn peak_intensity_timestep(grid: &GridCase, track: &HurricaneTrack) -> usize {
    let horizon = grid.horizon().min(track.horizon());
    let load = |t: usize| -> f64 {
        let Ok(p) = track.params_at(t) else { return 0.0 };
        grid.segments()
            .filter_map(|s| {
                let w = total_wind_speed(&p, s.segment.location).ok()?;
                fragility_prob(&s.segment.fragility, w).ok()
            })
            .sum()
    };
    (0..horizon)
        .map(|t| (t, load(t)))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0
}

/// `q(s)`: optimal single-scenario preventive-control cost.
pub fn severity(grid: &GridCase, outage: &ScenarioOutage, opts: &SolveOptions) -> Result<f64, AnalysisError> {
    let sol = ucmodel::solve_suc(grid, &[outage.clone()], &[1.0], opts)?;
    Ok(sol.objective)
}
