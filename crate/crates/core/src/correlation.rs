//! Intensity covariance from parameter uncertainty, and its Cholesky factor
//! built by successive rank-1 updates.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::stream_rng;
use crate::windfield::ParamUncertainty;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelationError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("rank-1 update lost positivity at pivot {index} (value {value:e})")]
    Factorization { index: usize, value: f64 },
    #[error("parameter covariance is not positive semi-definite (pivot {index}, value {value:e})")]
    NotPsd { index: usize, value: f64 },
}

/// Relative sensitivity of log-intensity to one parameter at one timestep,
/// one entry per relevant segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityVector {
    pub entries: Vec<f64>,
    pub param: usize,
    pub timestep: usize,
}

/// Covariance held as a sum of outer products `Σ f fᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceFactors {
    pub factors: Vec<Vec<f64>>,
    pub dim: usize,
}

impl CovarianceFactors {
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for f in &self.factors {
            for (di, fi) in d.iter_mut().zip(f) {
                *di += fi * fi;
            }
        }
        d
    }

    /// Dense row-major matrix. Only for diagnostics and tests.
    pub fn densify(&self) -> DenseMatrix {
        let n = self.dim;
        let mut m = DenseMatrix::zeros(n);
        for f in &self.factors {
            for i in 0..n {
                if f[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m.data[i * n + j] += f[i] * f[j];
                }
            }
        }
        m
    }

    /// Ridge added before factorization.
    pub fn ridge(&self) -> f64 {
        let max_diag = self.diagonal().into_iter().fold(0.0, f64::max);
        1e-10 * (1.0 + max_diag)
    }
}

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Correlation matrix; zero-variance rows map to zero off-diagonals.
    pub fn correlation(&self) -> DenseMatrix {
        let n = self.n;
        let sd: Vec<f64> = (0..n).map(|i| self.get(i, i).max(0.0).sqrt()).collect();
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = if i == j {
                    1.0
                } else if sd[i] > 0.0 && sd[j] > 0.0 {
                    self.get(i, j) / (sd[i] * sd[j])
                } else {
                    0.0
                };
            }
        }
        out
    }
}

/// `C = Σ_k σ_k² V_k V_kᵀ`, kept as the scaled vectors `σ_k V_k`.
pub fn build_covariance(
    sens: &[SensitivityVector],
    sigma: &ParamUncertainty,
) -> Result<CovarianceFactors, CorrelationError> {
    let dim = check_shapes(sens)?;
    if sigma.sigma.len() != sens.len() {
        return Err(CorrelationError::Shape(format!(
            "{} sensitivity vectors but {} standard errors",
            sens.len(),
            sigma.sigma.len()
        )));
    }
    let factors = sens
        .iter()
        .zip(&sigma.sigma)
        .map(|(v, s)| v.entries.iter().map(|e| e * s).collect())
        .collect();
    Ok(CovarianceFactors { factors, dim })
}

/// `C = V Σθ Vᵀ` for a full parameter covariance `Σθ` (row-major, K×K).
///
/// Σθ is factored as `Lθ Lθᵀ`; the columns of `V Lθ` become the factors.
pub fn build_covariance_full(
    sens: &[SensitivityVector],
    param_cov: &[Vec<f64>],
) -> Result<CovarianceFactors, CorrelationError> {
    let dim = check_shapes(sens)?;
    let k = sens.len();
    if param_cov.len() != k || param_cov.iter().any(|r| r.len() != k) {
        return Err(CorrelationError::Shape(format!(
            "parameter covariance must be {k}x{k}"
        )));
    }
    let l = psd_cholesky(param_cov)?;
    let mut factors = Vec::with_capacity(k);
    for col in 0..k {
        let mut f = vec![0.0; dim];
        for (row, v) in sens.iter().enumerate().skip(col) {
            let w = l[row][col];
            if w != 0.0 {
                for (fi, vi) in f.iter_mut().zip(&v.entries) {
                    *fi += vi * w;
                }
            }
        }
        factors.push(f);
    }
    Ok(CovarianceFactors { factors, dim })
}

fn check_shapes(sens: &[SensitivityVector]) -> Result<usize, CorrelationError> {
    let Some(first) = sens.first() else {
        return Ok(0);
    };
    let dim = first.entries.len();
    for v in sens {
        if v.entries.len() != dim {
            return Err(CorrelationError::Shape(format!(
                "sensitivity vector for parameter {} has length {}, expected {dim}",
                v.param,
                v.entries.len()
            )));
        }
        if v.timestep != first.timestep {
            return Err(CorrelationError::Shape(format!(
                "mixed timesteps {} and {}",
                first.timestep, v.timestep
            )));
        }
        if v.entries.iter().any(|e| !e.is_finite()) {
            return Err(CorrelationError::Shape(format!(
                "non-finite sensitivity for parameter {}",
                v.param
            )));
        }
    }
    Ok(dim)
}

/// Lower factor of a small PSD matrix; zero pivots give zero columns.
fn psd_cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, CorrelationError> {
    let k = a.len();
    let scale = (0..k).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut l = vec![vec![0.0; k]; k];
    for j in 0..k {
        for i in 0..k {
            if (a[i][j] - a[j][i]).abs() > 1e-12 * scale.max(1.0) {
                return Err(CorrelationError::NotPsd { index: i, value: a[i][j] - a[j][i] });
            }
        }
        let pivot = a[j][j] - (0..j).map(|p| l[j][p] * l[j][p]).sum::<f64>();
        if pivot < -tol {
            return Err(CorrelationError::NotPsd { index: j, value: pivot });
        }
        if pivot <= tol {
            for i in j + 1..k {
                let resid = a[i][j] - (0..j).map(|p| l[i][p] * l[j][p]).sum::<f64>();
                if resid.abs() > 1e-9 * scale.max(1.0) {
                    return Err(CorrelationError::NotPsd { index: j, value: pivot });
                }
            }
            continue;
        }
        let d = pivot.sqrt();
        l[j][j] = d;
        for i in j + 1..k {
            let s = a[i][j] - (0..j).map(|p| l[i][p] * l[j][p]).sum::<f64>();
            l[i][j] = s / d;
        }
    }
    Ok(l)
}

/// Lower-triangular `L` with `C + εI = L Lᵀ`, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    cols: Vec<f64>,
    pub eps: f64,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.cols[j * self.n + i]
        }
    }

    /// `out = L z`.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        out[..n].iter_mut().for_each(|o| *o = 0.0);
        for (j, &zj) in z.iter().enumerate().take(n) {
            if zj == 0.0 {
                continue;
            }
            let col = &self.cols[j * n + j..(j + 1) * n];
            for (o, lij) in out[j..n].iter_mut().zip(col) {
                *o += lij * zj;
            }
        }
    }

    /// `L Lᵀ` as a dense matrix.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.n;
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|p| self.get(i, p) * self.get(j, p)).sum();
                m.data[i * n + j] = s;
                m.data[j * n + i] = s;
            }
        }
        m
    }
}

/// Factor `C + εI` by starting from `√ε I` and applying one rank-1 update
/// per factor vector. O(N²K).
pub fn cholesky_rank1(factors: &CovarianceFactors) -> Result<CholeskyFactor, CorrelationError> {
    let n = factors.dim;
    let eps = factors.ridge();
    let mut cols = vec![0.0; n * n];
    let root = eps.sqrt();
    for j in 0..n {
        cols[j * n + j] = root;
    }
    let mut work = vec![0.0; n];
    for f in &factors.factors {
        if f.len() != n {
            return Err(CorrelationError::Shape(format!(
                "factor length {} for dimension {n}",
                f.len()
            )));
        }
        work.copy_from_slice(f);
        rank1_update(&mut cols, n, &mut work)?;
    }
    Ok(CholeskyFactor { n, cols, eps })
}

/// In-place `L L ᵀ += v vᵀ` on a column-major lower factor; `v` is clobbered.
fn rank1_update(cols: &mut [f64], n: usize, v: &mut [f64]) -> Result<(), CorrelationError> {
    for j in 0..n {
        let vj = v[j];
        if vj == 0.0 {
            continue;
        }
        let ljj = cols[j * n + j];
        let arg = ljj * ljj + vj * vj;
        if !(arg > 0.0) || !arg.is_finite() || ljj <= 0.0 {
            return Err(CorrelationError::Factorization { index: j, value: arg });
        }
        let r = arg.sqrt();
        let c = r / ljj;
        let s = vj / ljj;
        cols[j * n + j] = r;
        let col = &mut cols[j * n + j + 1..(j + 1) * n];
        for (lij, vi) in col.iter_mut().zip(v[j + 1..n].iter_mut()) {
            *lij = (*lij + s * *vi) / c;
            *vi = c * *vi - s * *lij;
        }
    }
    Ok(())
}

/// `n` draws of `means + L z`, `z` standard normal. Draw `s` uses its own
/// stream keyed by `(seed, s)`.
pub fn correlated_normal_draws(
    l: &CholeskyFactor,
    means: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, CorrelationError> {
    if means.len() != l.dim() {
        return Err(CorrelationError::Shape(format!(
            "{} means for dimension {}",
            means.len(),
            l.dim()
        )));
    }
    let dim = l.dim();
    let mut z = vec![0.0; dim];
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let mut rng = stream_rng(seed, &[s as u64]);
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let mut x = vec![0.0; dim];
        l.apply(&z, &mut x);
        for (xi, m) in x.iter_mut().zip(means) {
            *xi += m;
        }
        out.push(x);
    }
    Ok(out)
}

/// Dense matrix in MatrixMarket array format (column-major values).
pub fn write_matrix_market<W: Write>(
    mut w: W,
    n: usize,
    get: impl Fn(usize, usize) -> f64,
) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{n} {n}")?;
    for j in 0..n {
        for i in 0..n {
            writeln!(w, "{:e}", get(i, j))?;
        }
    }
    Ok(())
}
