//! Failure scenario pools.
//!
//! Two samplers share everything except how segment intensities are drawn:
//! the spatially dependent sampler draws all relevant segments jointly from
//! the propagated covariance, the independent sampler draws each segment
//! from its own marginal. Both draw normals and uniforms from the same
//! per-(timestep, scenario) stream in the same order.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlation::{build_covariance, cholesky_rank1, CholeskyFactor, CorrelationError, SensitivityVector};
use crate::fragility::{fragility_prob, FragilityError, FragilityParams};
use crate::grid::GridCase;
use crate::rng::stream_rng;
use crate::windfield::{param_sensitivities, total_wind_speed, HurricaneTrack, WindError, N_PARAMS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("wind field at t={t}, segment '{segment}': {source}")]
    Wind {
        t: usize,
        segment: String,
        source: WindError,
    },
    #[error("covariance at t={t}: {source}")]
    Correlation { t: usize, source: CorrelationError },
    #[error(transparent)]
    Fragility(#[from] FragilityError),
    #[error("invalid sampler input: {0}")]
    InvalidInput(String),
    #[error("unknown segment index {0}")]
    UnknownSegment(usize),
}

/// Sampler that produced a pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    /// Spatially dependent (joint) sampling.
    Relevance,
    /// Independent per-segment sampling.
    Normal,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::Relevance => "relevance",
            SamplerKind::Normal => "normal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Segments whose predicted failure probability falls below this are
    /// assumed not to fail.
    pub p_threshold: f64,
    /// Predicted wind below this (m/s) is treated as calm.
    pub min_wind: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            p_threshold: 1e-4,
            min_wind: 0.1,
        }
    }
}

/// Partition of the segments at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub t: usize,
    /// Global segment indices sampled jointly, ascending.
    pub relevant: Vec<usize>,
    pub nonfragile: Vec<usize>,
    /// Predicted wind (m/s) for each relevant segment.
    pub mean_wind: Vec<f64>,
}

pub fn classify_segments(
    grid: &GridCase,
    track: &HurricaneTrack,
    t: usize,
    cfg: &SamplerConfig,
) -> Result<Classification, SamplerError> {
    let params = track.params_at(t).map_err(|source| SamplerError::Wind {
        t,
        segment: String::new(),
        source,
    })?;
    let mut out = Classification {
        t,
        relevant: Vec::new(),
        nonfragile: Vec::new(),
        mean_wind: Vec::new(),
    };
    for seg in grid.segments() {
        let w = total_wind_speed(&params, seg.segment.location).map_err(|source| SamplerError::Wind {
            t,
            segment: seg.segment.id.clone(),
            source,
        })?;
        let relevant = w >= cfg.min_wind && fragility_prob(&seg.segment.fragility, w)? >= cfg.p_threshold;
        if relevant {
            out.relevant.push(seg.index);
            out.mean_wind.push(w);
        } else {
            out.nonfragile.push(seg.index);
        }
    }
    Ok(out)
}

/// Everything needed to draw one timestep, computed once per pool.
#[derive(Debug, Clone)]
pub struct TimestepModel {
    pub t: usize,
    pub relevant: Vec<usize>,
    pub ln_mean: Vec<f64>,
    pub fragility: Vec<FragilityParams>,
    pub chol: CholeskyFactor,
    /// Marginal standard deviation of ln w, i.e. √(C_ii + ε).
    pub marginal_sd: Vec<f64>,
}

pub fn prepare_timestep(
    grid: &GridCase,
    track: &HurricaneTrack,
    t: usize,
    cfg: &SamplerConfig,
) -> Result<TimestepModel, SamplerError> {
    let class = classify_segments(grid, track, t, cfg)?;
    let params = track.params_at(t).map_err(|source| SamplerError::Wind {
        t,
        segment: String::new(),
        source,
    })?;
    let sigma = track.sigma_at(t).map_err(|source| SamplerError::Wind {
        t,
        segment: String::new(),
        source,
    })?;
    let segs: Vec<_> = grid.segments().collect();
    let mut sens: Vec<SensitivityVector> = (0..N_PARAMS)
        .map(|k| SensitivityVector {
            entries: Vec::with_capacity(class.relevant.len()),
            param: k,
            timestep: t,
        })
        .collect();
    for (&i, &w) in class.relevant.iter().zip(&class.mean_wind) {
        let seg = segs[i].segment;
        let grad = param_sensitivities(&params, seg.location).map_err(|source| SamplerError::Wind {
            t,
            segment: seg.id.clone(),
            source,
        })?;
        for (k, g) in grad.iter().enumerate() {
            sens[k].entries.push(g / w);
        }
    }
    let factors = build_covariance(&sens, &sigma).map_err(|source| SamplerError::Correlation { t, source })?;
    let chol = cholesky_rank1(&factors).map_err(|source| SamplerError::Correlation { t, source })?;
    let marginal_sd = factors.diagonal().iter().map(|d| (d + chol.eps).sqrt()).collect();
    Ok(TimestepModel {
        t,
        ln_mean: class.mean_wind.iter().map(|w| w.ln()).collect(),
        fragility: class.relevant.iter().map(|&i| segs[i].segment.fragility).collect(),
        relevant: class.relevant,
        chol,
        marginal_sd,
    })
}

/// Segment failure at one timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FailureEvent {
    pub scenario: usize,
    pub segment: usize,
    pub t_fail: usize,
}

/// Line outage times of one scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioOutage {
    pub id: usize,
    /// First failed interval of each line, `None` if it survives the horizon.
    pub line_fail: Vec<Option<usize>>,
}

impl ScenarioOutage {
    pub fn intact(id: usize, n_lines: usize) -> Self {
        Self {
            id,
            line_fail: vec![None; n_lines],
        }
    }

    /// `u^L_lt`: in service at `t`.
    pub fn in_service(&self, line: usize, t: usize) -> bool {
        self.line_fail[line].is_none_or(|tf| t < tf)
    }

    pub fn failed_count_at(&self, t: usize) -> usize {
        self.line_fail.iter().filter(|f| f.is_some_and(|tf| tf <= t)).count()
    }

    pub fn failed_lines(&self) -> usize {
        self.line_fail.iter().filter(|f| f.is_some()).count()
    }

    /// Line × time state matrix.
    pub fn state_matrix(&self, horizon: usize) -> Vec<Vec<bool>> {
        (0..self.line_fail.len())
            .map(|l| (0..horizon).map(|t| self.in_service(l, t)).collect())
            .collect()
    }
}

/// Line states from segment failures: a line is out from the earliest
/// failure of any of its segments onward.
pub fn aggregate_line_states(
    events: &[FailureEvent],
    segment_line: &[usize],
    n_lines: usize,
    n_scenarios: usize,
) -> Result<Vec<ScenarioOutage>, SamplerError> {
    let mut out: Vec<ScenarioOutage> = (0..n_scenarios).map(|s| ScenarioOutage::intact(s, n_lines)).collect();
    for e in events {
        let &line = segment_line.get(e.segment).ok_or(SamplerError::UnknownSegment(e.segment))?;
        let scen = out
            .get_mut(e.scenario)
            .ok_or_else(|| SamplerError::InvalidInput(format!("scenario {} >= {n_scenarios}", e.scenario)))?;
        let slot = &mut scen.line_fail[line];
        *slot = Some(slot.map_or(e.t_fail, |tf| tf.min(e.t_fail)));
    }
    Ok(out)
}

/// Sparse scenario pool: only the first failure of each segment is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPool {
    pub kind: SamplerKind,
    pub seed: u64,
    pub n_scenarios: usize,
    pub horizon: usize,
    pub track_hash: String,
    pub line_ids: Vec<String>,
    pub segment_ids: Vec<String>,
    pub segment_line: Vec<usize>,
    /// Relevant segment indices per timestep.
    pub relevance: Vec<Vec<usize>>,
    /// Sorted by (scenario, segment).
    pub events: Vec<FailureEvent>,
}

impl ScenarioPool {
    pub fn outages(&self) -> Vec<ScenarioOutage> {
        aggregate_line_states(&self.events, &self.segment_line, self.line_ids.len(), self.n_scenarios)
            .expect("pool events reference known segments")
    }

    /// Uniform pool weight.
    pub fn weight(&self) -> f64 {
        1.0 / self.n_scenarios as f64
    }

    /// Per-line, per-timestep outage frequency.
    pub fn line_failure_frequency(&self) -> Vec<Vec<f64>> {
        let mut freq = vec![vec![0.0; self.horizon]; self.line_ids.len()];
        for o in self.outages() {
            for (l, f) in o.line_fail.iter().enumerate() {
                if let Some(tf) = f {
                    for row in freq[l].iter_mut().skip(*tf) {
                        *row += 1.0;
                    }
                }
            }
        }
        let n = self.n_scenarios as f64;
        freq.iter_mut().flatten().for_each(|v| *v /= n);
        freq
    }

    /// Per-segment frequency of having failed at or before `t`.
    pub fn segment_failure_frequency(&self, t: usize) -> Vec<f64> {
        let mut freq = vec![0.0; self.segment_ids.len()];
        for e in self.events.iter().filter(|e| e.t_fail <= t) {
            freq[e.segment] += 1.0;
        }
        let n = self.n_scenarios as f64;
        freq.iter_mut().for_each(|v| *v /= n);
        freq
    }
}

/// Spatially dependent sampling.
pub fn sample_pool_sds(
    grid: &GridCase,
    track: &HurricaneTrack,
    n_scenarios: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<ScenarioPool, SamplerError> {
    sample_pool(grid, track, n_scenarios, seed, cfg, SamplerKind::Relevance)
}

/// Independent sequential Monte Carlo baseline.
pub fn sample_pool_smc(
    grid: &GridCase,
    track: &HurricaneTrack,
    n_scenarios: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<ScenarioPool, SamplerError> {
    sample_pool(grid, track, n_scenarios, seed, cfg, SamplerKind::Normal)
}

pub fn sample_pool(
    grid: &GridCase,
    track: &HurricaneTrack,
    n_scenarios: usize,
    seed: u64,
    cfg: &SamplerConfig,
    kind: SamplerKind,
) -> Result<ScenarioPool, SamplerError> {
    if n_scenarios == 0 {
        return Err(SamplerError::InvalidInput("n_scenarios must be >= 1".into()));
    }
    if track.horizon() < grid.horizon() {
        return Err(SamplerError::InvalidInput(format!(
            "track covers {} intervals, grid needs {}",
            track.horizon(),
            grid.horizon()
        )));
    }
    let horizon = grid.horizon();
    let models = (0..horizon)
        .into_par_iter()
        .map(|t| prepare_timestep(grid, track, t, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let events: Vec<FailureEvent> = (0..n_scenarios)
        .into_par_iter()
        .flat_map_iter(|s| sample_scenario(&models, s, seed, kind))
        .collect();
    Ok(ScenarioPool {
        kind,
        seed,
        n_scenarios,
        horizon,
        track_hash: crate::ingest::content_hash(track),
        line_ids: grid.lines.iter().map(|l| l.id.clone()).collect(),
        segment_ids: grid.segment_ids(),
        segment_line: grid.segment_lines(),
        relevance: models.iter().map(|m| m.relevant.clone()).collect(),
        events,
    })
}

fn sample_scenario(models: &[TimestepModel], s: usize, seed: u64, kind: SamplerKind) -> Vec<FailureEvent> {
    let mut first: BTreeMap<usize, usize> = BTreeMap::new();
    let mut z = Vec::new();
    let mut ln_w = Vec::new();
    for m in models {
        let n = m.relevant.len();
        if n == 0 {
            continue;
        }
        let mut rng = stream_rng(seed, &[m.t as u64, s as u64]);
        z.clear();
        z.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        ln_w.clear();
        ln_w.resize(n, 0.0);
        match kind {
            SamplerKind::Relevance => m.chol.apply(&z, &mut ln_w),
            SamplerKind::Normal => {
                for ((x, zi), sd) in ln_w.iter_mut().zip(&z).zip(&m.marginal_sd) {
                    *x = sd * zi;
                }
            }
        }
        for i in 0..n {
            let r: f64 = rng.random();
            let wstar = m.fragility[i].normalize_ln(m.ln_mean[i] + ln_w[i]);
            if crate::fragility::failure_indicator(wstar, r) {
                first.entry(m.relevant[i]).or_insert(m.t);
            }
        }
    }
    first
        .into_iter()
        .map(|(segment, t_fail)| FailureEvent {
            scenario: s,
            segment,
            t_fail,
        })
        .collect()
}
