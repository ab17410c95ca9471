//! Lognormal fragility curves and the Bernoulli failure indicator.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::rng::stream_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FragilityError {
    #[error("intensity must be positive, got {0}")]
    NonPositiveIntensity(f64),
    #[error("invalid fragility parameters: beta={beta}, w0={w0}")]
    InvalidParams { beta: f64, w0: f64 },
    #[error("invalid experiment setup: {0}")]
    InvalidSetup(String),
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FragilityParams {
    /// Log-slope.
    pub beta: f64,
    /// Median capacity intensity (m/s).
    pub w0: f64,
}

impl FragilityParams {
    pub fn new(beta: f64, w0: f64) -> Result<Self, FragilityError> {
        let fp = Self { beta, w0 };
        fp.validate()?;
        Ok(fp)
    }

    pub fn validate(&self) -> Result<(), FragilityError> {
        if self.beta > 0.0 && self.w0 > 0.0 && self.beta.is_finite() && self.w0.is_finite() {
            Ok(())
        } else {
            Err(FragilityError::InvalidParams {
                beta: self.beta,
                w0: self.w0,
            })
        }
    }

    /// Normalized intensity for a log-intensity value.
    pub fn normalize_ln(&self, ln_w: f64) -> NormalizedIntensity {
        NormalizedIntensity((ln_w - self.w0.ln()) / self.beta)
    }

    pub fn normalize(&self, w: f64) -> Result<NormalizedIntensity, FragilityError> {
        if !(w > 0.0) {
            return Err(FragilityError::NonPositiveIntensity(w));
        }
        Ok(self.normalize_ln(w.ln()))
    }
}

/// `(ln w − ln w0) / β`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct NormalizedIntensity(pub f64);

impl NormalizedIntensity {
    pub fn probability(self) -> f64 {
        std_normal_cdf(self.0)
    }
}

/// Failure probability at intensity `w`.
pub fn fragility_prob(fp: &FragilityParams, w: f64) -> Result<f64, FragilityError> {
    Ok(fp.normalize(w)?.probability())
}

/// `true` (failed) iff `r < Φ(w*)`. Ties resolve to survival.
pub fn failure_indicator(wstar: NormalizedIntensity, r: f64) -> bool {
    r < wstar.probability()
}

/// Pearson correlation that keeps "no variation" apart from "no correlation".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Correlation {
    Defined(f64),
    /// At least one margin was constant in the sample.
    Undefined,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Defined(v) => Some(v),
            Correlation::Undefined => None,
        }
    }
}

/// Pearson correlation of two binary sequences.
pub fn binary_correlation(x: &[bool], y: &[bool]) -> Correlation {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxy) = (0u64, 0u64, 0u64);
    for (&a, &b) in x.iter().zip(y) {
        sx += a as u64;
        sy += b as u64;
        sxy += (a && b) as u64;
    }
    let (sx, sy, sxy) = (sx as f64, sy as f64, sxy as f64);
    let vx = n * sx - sx * sx;
    let vy = n * sy - sy * sy;
    if vx <= 0.0 || vy <= 0.0 {
        return Correlation::Undefined;
    }
    Correlation::Defined((n * sxy - sx * sy) / (vx * vy).sqrt())
}

/// Two components with jointly normal normalized intensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoComponentSetup {
    pub mean_i: f64,
    pub mean_j: f64,
    pub sd_i: f64,
    pub sd_j: f64,
    pub rho: f64,
}

impl TwoComponentSetup {
    fn validate(&self, n: usize) -> Result<(), FragilityError> {
        if !(self.sd_i > 0.0 && self.sd_j > 0.0) {
            return Err(FragilityError::InvalidSetup(format!(
                "standard deviations must be positive ({}, {})",
                self.sd_i, self.sd_j
            )));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(FragilityError::InvalidSetup(format!("rho {} outside [-1, 1]", self.rho)));
        }
        if n < 2 {
            return Err(FragilityError::InvalidSetup(format!("need n >= 2, got {n}")));
        }
        Ok(())
    }
}

/// Sampled failure indicators of the two components.
pub fn sample_two_component(
    setup: &TwoComponentSetup,
    n: usize,
    seed: u64,
) -> Result<(Vec<bool>, Vec<bool>), FragilityError> {
    setup.validate(n)?;
    let mut rng = stream_rng(seed, &[]);
    let tail = (1.0 - setup.rho * setup.rho).max(0.0).sqrt();
    let mut xi = Vec::with_capacity(n);
    let mut xj = Vec::with_capacity(n);
    for _ in 0..n {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let wi = setup.mean_i + setup.sd_i * z1;
        let wj = setup.mean_j + setup.sd_j * (setup.rho * z1 + tail * z2);
        let ri: f64 = rng.random();
        let rj: f64 = rng.random();
        xi.push(failure_indicator(NormalizedIntensity(wi), ri));
        xj.push(failure_indicator(NormalizedIntensity(wj), rj));
    }
    Ok((xi, xj))
}

/// Monte Carlo estimate of the correlation between two failure indicators.
pub fn two_component_corr(setup: &TwoComponentSetup, n: usize, seed: u64) -> Result<Correlation, FragilityError> {
    let (xi, xj) = sample_two_component(setup, n, seed)?;
    Ok(binary_correlation(&xi, &xj))
}

/// The mean/σ*/ρ grid of the two-component experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityGrid {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub rhos: Vec<f64>,
    pub n: usize,
    pub seed: u64,
}

impl Default for SensitivityGrid {
    fn default() -> Self {
        Self {
            means: vec![-1.0, 0.0, 1.0],
            sds: (0..7).map(|i| 10f64.powf(-1.0 + 0.5 * i as f64)).collect(),
            rhos: vec![-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            n: 3000,
            seed: 20_240_602,
        }
    }
}

/// One row of the tidy sensitivity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub mean_i: f64,
    pub mean_j: f64,
    pub sd_i: f64,
    pub sd_j: f64,
    pub rho: f64,
    pub corr: Correlation,
    pub n: usize,
    pub seed: u64,
}

impl SensitivityGrid {
    /// Run every cell. Cells sharing (σ*_i, σ*_j, ρ) reuse one random stream
    /// across mean pairs, so surfaces of different means differ only through
    /// the means themselves.
    pub fn run(&self) -> Result<Vec<SensitivityRow>, FragilityError> {
        let mut cells = Vec::new();
        for &mean_i in &self.means {
            for &mean_j in &self.means {
                for (a, &sd_i) in self.sds.iter().enumerate() {
                    for (b, &sd_j) in self.sds.iter().enumerate() {
                        for (c, &rho) in self.rhos.iter().enumerate() {
                            let seed = self.cell_seed(a, b, c);
                            let setup = TwoComponentSetup {
                                mean_i,
                                mean_j,
                                sd_i,
                                sd_j,
                                rho,
                            };
                            cells.push((setup, seed));
                        }
                    }
                }
            }
        }
        cells
            .par_iter()
            .map(|(setup, seed)| {
                Ok(SensitivityRow {
                    mean_i: setup.mean_i,
                    mean_j: setup.mean_j,
                    sd_i: setup.sd_i,
                    sd_j: setup.sd_j,
                    rho: setup.rho,
                    corr: two_component_corr(setup, self.n, *seed)?,
                    n: self.n,
                    seed: *seed,
                })
            })
            .collect()
    }

    fn cell_seed(&self, sd_i: usize, sd_j: usize, rho: usize) -> u64 {
        stream_rng(self.seed, &[sd_i as u64, sd_j as u64, rho as u64]).next_u64()
    }
}
