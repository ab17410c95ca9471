//! Scenario-selection rules and their weights.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::stream_rng;

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionRule {
    Random,
    Stratified,
    Worst,
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionRule::Random => "random",
            SelectionRule::Stratified => "stratified",
            SelectionRule::Worst => "worst",
        })
    }
}

impl FromStr for SelectionRule {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(SelectionRule::Random),
            "stratified" => Ok(SelectionRule::Stratified),
            "worst" => Ok(SelectionRule::Worst),
            other => Err(AnalysisError::InvalidInput(format!("unknown selection rule '{other}'"))),
        }
    }
}

/// Selected pool scenarios with their probability weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSelection {
    pub rule: SelectionRule,
    pub requested: usize,
    pub seed: u64,
    /// Pool scenario ids, ascending.
    pub scenarios: Vec<usize>,
    pub weights: Vec<f64>,
}

impl WeightedSelection {
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// `Σ π_s · value(s)` with values indexed by pool scenario id.
    pub fn set_severity(&self, values: &[f64]) -> f64 {
        self.scenarios.iter().zip(&self.weights).map(|(&s, w)| w * values[s]).sum()
    }
}

/// Number of strata used by the stratified rule.
pub const STRATA: usize = 10;

/// Decile of each scenario by rank of `(q̂, id)`.
pub fn decile_strata(qhat: &[f64]) -> Vec<usize> {
    let m = qhat.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| qhat[a].total_cmp(&qhat[b]).then(a.cmp(&b)));
    let mut stratum = vec![0; m];
    for (rank, &s) in order.iter().enumerate() {
        stratum[s] = rank * STRATA / m;
    }
    stratum
}

/// Apply a selection rule to pool scenarios with proxy severities `qhat`.
pub fn select(qhat: &[f64], rule: SelectionRule, n: usize, seed: u64) -> Result<WeightedSelection, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::InvalidInput("N must be >= 1".into()));
    }
    let m = qhat.len();
    if m == 0 {
        return Err(AnalysisError::InvalidInput("empty pool".into()));
    }
    let take = if n > m {
        log::warn!("requested {n} scenarios from a pool of {m}; selecting the whole pool");
        m
    } else {
        n
    };
    let mut rng = stream_rng(seed, &[rule as u64]);
    let mut picked: Vec<(usize, f64)> = match rule {
        SelectionRule::Random => index::sample(&mut rng, m, take)
            .into_iter()
            .map(|s| (s, 1.0 / take as f64))
            .collect(),
        SelectionRule::Worst => {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| qhat[b].total_cmp(&qhat[a]).then(a.cmp(&b)));
            order.into_iter().take(take).map(|s| (s, 1.0 / take as f64)).collect()
        }
        SelectionRule::Stratified => {
            let stratum = decile_strata(qhat);
            let mut members = vec![Vec::new(); STRATA];
            for (s, &d) in stratum.iter().enumerate() {
                members[d].push(s);
            }
            let alloc = largest_remainder(&members.iter().map(Vec::len).collect::<Vec<_>>(), take, &mut rng);
            let represented: f64 = members
                .iter()
                .zip(&alloc)
                .filter(|(_, &a)| a > 0)
                .map(|(mem, _)| mem.len() as f64)
                .sum();
            let mut out = Vec::with_capacity(take);
            for (mem, &a) in members.iter().zip(&alloc) {
                if a == 0 {
                    continue;
                }
                let w = mem.len() as f64 / represented / a as f64;
                out.extend(index::sample(&mut rng, mem.len(), a).into_iter().map(|i| (mem[i], w)));
            }
            out
        }
    };
    picked.sort_by_key(|&(s, _)| s);
    Ok(WeightedSelection {
        rule,
        requested: n,
        seed,
        scenarios: picked.iter().map(|p| p.0).collect(),
        weights: picked.iter().map(|p| p.1).collect(),
    })
}

/// Proportional allocation of `total` picks over strata of the given sizes;
/// leftover picks go to the largest fractional remainders, ties in random order.
fn largest_remainder(sizes: &[usize], total: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let pool: usize = sizes.iter().sum();
    let exact: Vec<f64> = sizes.iter().map(|&s| total as f64 * s as f64 / pool as f64).collect();
    let mut alloc: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = total - alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] > alloc[i]).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    for i in order {
        if left == 0 {
            break;
        }
        alloc[i] += 1;
        left -= 1;
    }
    alloc
}

/// Kendall rank correlation τ-b.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].total_cmp(&x[j]) as i64;
            let dy = y[i].total_cmp(&y[j]) as i64;
            match (dx, dy) {
                (0, 0) => {}
                (0, _) => tx += 1,
                (_, 0) => ty += 1,
                _ if dx == dy => conc += 1,
                _ => disc += 1,
            }
        }
    }
    let denom = (((conc + disc + tx) * (conc + disc + ty)) as f64).sqrt();
    (denom > 0.0).then(|| (conc - disc) as f64 / denom)
}
