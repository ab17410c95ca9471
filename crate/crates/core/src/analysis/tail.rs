//! Tail-heaviness metrics of faulted-line counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sampler::{ScenarioOutage, ScenarioPool};

use super::AnalysisError;

/// A statistic that may be undefined for the sample at hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Value(f64),
    NotEstimable,
}

impl Estimate {
    pub fn value(self) -> Option<f64> {
        match self {
            Estimate::Value(v) => Some(v),
            Estimate::NotEstimable => None,
        }
    }

    pub fn csv(self) -> String {
        match self {
            Estimate::Value(v) => format!("{v}"),
            Estimate::NotEstimable => "NA".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillConfig {
    /// Fraction of the sample used as the tail.
    pub k_frac: f64,
    /// Added to every sample before taking logs (count data contain zeros).
    pub shift: f64,
    /// Minimum number of samples strictly above the tail threshold.
    pub min_exceedances: usize,
}

impl Default for HillConfig {
    fn default() -> Self {
        Self {
            k_frac: 0.05,
            shift: 1.0,
            min_exceedances: 20,
        }
    }
}

/// Hill estimate of the tail index on the top `k = ⌈k_frac·n⌉` order
/// statistics: `k / Σ ln(X_(n−i+1) / X_(n−k))`.
pub fn hill_alpha(samples: &[f64], cfg: &HillConfig) -> Estimate {
    let n = samples.len();
    if n < 2 || !(cfg.k_frac > 0.0 && cfg.k_frac < 1.0) {
        return Estimate::NotEstimable;
    }
    let mut x: Vec<f64> = samples.iter().map(|v| v + cfg.shift).collect();
    x.sort_by(f64::total_cmp);
    let k = ((cfg.k_frac * n as f64).ceil() as usize).clamp(1, n - 1);
    let threshold = x[n - k - 1];
    if !(threshold > 0.0) {
        return Estimate::NotEstimable;
    }
    if x.iter().filter(|&&v| v > threshold).count() < cfg.min_exceedances {
        return Estimate::NotEstimable;
    }
    let sum: f64 = x[n - k..].iter().map(|v| (v / threshold).ln()).sum();
    if sum > 0.0 {
        Estimate::Value(k as f64 / sum)
    } else {
        Estimate::NotEstimable
    }
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

pub fn median(samples: &[f64]) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    if n % 2 == 1 {
        x[n / 2]
    } else {
        0.5 * (x[n / 2 - 1] + x[n / 2])
    }
}

/// Sample excess kurtosis `m4 / m2² − 3`.
pub fn excess_kurtosis(samples: &[f64]) -> Estimate {
    if samples.len() < 4 {
        return Estimate::NotEstimable;
    }
    let m = mean(samples);
    let n = samples.len() as f64;
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in samples {
        let d2 = (v - m) * (v - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if m2 <= 0.0 {
        return Estimate::NotEstimable;
    }
    Estimate::Value(m4 / (m2 * m2) - 3.0)
}

pub fn mean_median_ratio(samples: &[f64]) -> Estimate {
    if samples.is_empty() {
        return Estimate::NotEstimable;
    }
    let med = median(samples);
    if med > 0.0 {
        Estimate::Value(mean(samples) / med)
    } else {
        Estimate::NotEstimable
    }
}

/// Failed-line count of every scenario at `t`.
pub fn faulted_counts(outages: &[ScenarioOutage], t: usize) -> Vec<f64> {
    outages.iter().map(|o| o.failed_count_at(t) as f64).collect()
}

/// Histogram of failed-line counts at `t`.
pub fn faulted_count_distribution(pool: &ScenarioPool, t: usize) -> Result<BTreeMap<usize, usize>, AnalysisError> {
    if t >= pool.horizon {
        return Err(AnalysisError::TimestepOutOfRange { t, horizon: pool.horizon });
    }
    let mut hist = BTreeMap::new();
    for o in pool.outages() {
        *hist.entry(o.failed_count_at(t)).or_insert(0) += 1;
    }
    Ok(hist)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub hill_alpha: Estimate,
    pub excess_kurtosis: Estimate,
    pub mmr: Estimate,
}

impl TailRow {
    pub fn from_counts(t: usize, counts: &[f64], cfg: &HillConfig) -> Self {
        Self {
            t,
            mean: mean(counts),
            median: median(counts),
            max: counts.iter().copied().fold(0.0, f64::max),
            hill_alpha: hill_alpha(counts, cfg),
            excess_kurtosis: excess_kurtosis(counts),
            mmr: mean_median_ratio(counts),
        }
    }
}

pub const TAIL_CSV_HEADER: &str = "t,mean,median,max,hill_alpha,excess_kurtosis,mmr";

impl TailRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.t,
            self.mean,
            self.median,
            self.max,
            self.hill_alpha.csv(),
            self.excess_kurtosis.csv(),
            self.mmr.csv()
        )
    }
}

/// Per-timestep tail metrics of a pool.
pub fn tail_report(pool: &ScenarioPool, cfg: &HillConfig) -> Vec<TailRow> {
    let outages = pool.outages();
    (0..pool.horizon)
        .map(|t| TailRow::from_counts(t, &faulted_counts(&outages, t), cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_not_estimable() {
        let x = vec![3.0; 1000];
        assert_eq!(hill_alpha(&x, &HillConfig::default()), Estimate::NotEstimable);
        assert_eq!(excess_kurtosis(&x), Estimate::NotEstimable);
        assert_eq!(mean_median_ratio(&x), Estimate::Value(1.0));
        assert_eq!(mean_median_ratio(&[0.0, 0.0, 1.0]), Estimate::NotEstimable);
    }

    #[test]
    fn small_samples() {
        assert_eq!(excess_kurtosis(&[1.0, 2.0, 3.0]), Estimate::NotEstimable);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        // two-point symmetric distribution has κ = −2
        let k = excess_kurtosis(&[0.0, 1.0, 0.0, 1.0]).value().unwrap();
        assert!((k + 2.0).abs() < 1e-12);
    }
}
