//! Dense numerical primitives shared by every detector.
//!
//! Matrices are stored row-major in a flat `Vec<f64>`. Covariances use the
//! population convention (divide by the count) so that determinants computed
//! here are directly comparable with the `1/h` weighting of the MCD objective.
//! Inverses are never materialized: log-determinants and Mahalanobis
//! distances both go through a Cholesky factor.

mod chi2;

pub use chi2::{chi2_cdf, chi2_quantile, ln_gamma, regularized_gamma_p, regularized_gamma_q};

use crate::error::{Error, Result};

/// An `n x p` matrix of observations, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Domain(format!("data matrix must be non-empty, got {n}x{p}")));
        }
        if values.len() != n * p {
            return Err(Error::Domain(format!(
                "expected {} values for a {n}x{p} matrix, got {}",
                n * p,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite entry at row {}, column {}",
                pos / p,
                pos % p
            )));
        }
        Ok(Self { n, p, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::Domain(format!("row {i} has {} columns, expected {p}", row.len())));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), p, values)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Copy of the rows listed in `rows` (repeats allowed) restricted to `cols`.
    pub fn gather(&self, rows: &[usize], cols: &[usize]) -> Result<DataMatrix> {
        let mut values = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            let row = self.row(i);
            values.extend(cols.iter().map(|&j| row[j]));
        }
        DataMatrix::new(rows.len(), cols.len(), values)
    }
}

/// A dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    values: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, values: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut values = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Domain(format!("matrix row has {} entries, expected {dim}", row.len())));
            }
            values.extend_from_slice(row);
        }
        Ok(Self { dim, values })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> SquareMatrix {
        let mut out = SquareMatrix::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> SquareMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.values[i * self.dim + i] += shift;
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

/// Pivots below this fraction of the original diagonal entry are treated as
/// zero; rank-deficient covariances otherwise survive on rounding noise.
const RELATIVE_PIVOT_TOL: f64 = 1e-13;

impl Cholesky {
    pub fn factor(m: &SquareMatrix) -> Result<Self> {
        let n = m.dim;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = m.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            let scale = m.get(j, j).abs();
            if !diag.is_finite() || diag <= RELATIVE_PIVOT_TOL * scale {
                return Err(Error::NotPositiveDefinite { index: j, pivot: diag });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { dim: n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.lower[i * self.dim + i].ln()).sum::<f64>()
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(l, y)| l * y).sum();
            b[i] = (b[i] - s) / self.lower[i * n + i];
        }
    }

    /// `diffᵀ M⁻¹ diff`, computed as `‖L⁻¹ diff‖²`.
    pub fn quadratic_form_inv(&self, diff: &[f64]) -> f64 {
        let mut y = diff.to_vec();
        self.solve_lower_in_place(&mut y);
        y.iter().map(|v| v * v).sum()
    }

    /// `L z`, used to colour standard-normal draws.
    pub fn mul_lower(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| self.lower[i * n..=i * n + i].iter().zip(z).map(|(l, v)| l * v).sum())
            .collect()
    }
}

/// Robust location and scatter living on a subset of the original variables.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustEstimate {
    pub location: Vec<f64>,
    pub scatter: SquareMatrix,
    /// Strictly increasing indices into the original columns.
    pub variables: Vec<usize>,
    /// χ² degrees of freedom for cutoffs; always `variables.len()`.
    pub df: usize,
}

impl RobustEstimate {
    pub fn new(location: Vec<f64>, scatter: SquareMatrix, variables: Vec<usize>, p: usize) -> Result<Self> {
        let d = variables.len();
        if d == 0 || location.len() != d || scatter.dim() != d {
            return Err(Error::Domain(format!(
                "estimate dimensions disagree: location {}, scatter {}, variables {d}",
                location.len(),
                scatter.dim()
            )));
        }
        if variables.windows(2).any(|w| w[0] >= w[1]) || variables[d - 1] >= p {
            return Err(Error::Domain("estimate variables must be strictly increasing and < p".into()));
        }
        if !scatter.is_symmetric() {
            return Err(Error::Domain("scatter matrix is not symmetric".into()));
        }
        Cholesky::factor(&scatter)?;
        Ok(Self { location, scatter, variables, df: d })
    }

    /// Squared robust distances of every row of `x`, using only `self.variables`.
    pub fn distances(&self, x: &DataMatrix) -> Result<Vec<f64>> {
        let chol = Cholesky::factor(&self.scatter)?;
        let mut diff = vec![0.0; self.df];
        Ok(x.rows()
            .map(|row| {
                for (k, &j) in self.variables.iter().enumerate() {
                    diff[k] = row[j] - self.location[k];
                }
                chol.quadratic_form_inv(&diff)
            })
            .collect())
    }
}

pub fn sample_mean(x: &DataMatrix) -> Vec<f64> {
    let mut mean = vec![0.0; x.ncols()];
    for row in x.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    let n = x.nrows() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Population covariance `(1/n) Σ (xᵢ-μ)(xᵢ-μ)ᵀ`.
pub fn sample_covariance(x: &DataMatrix) -> Result<SquareMatrix> {
    if x.nrows() < 2 {
        return Err(Error::DegenerateSample(format!(
            "covariance needs at least 2 observations, got {}",
            x.nrows()
        )));
    }
    let rows: Vec<usize> = (0..x.nrows()).collect();
    let cols: Vec<usize> = (0..x.ncols()).collect();
    Ok(subset_moments(x, &rows, &cols)?.1)
}

/// Mean and population covariance of the multiset `rows` restricted to `cols`.
///
/// Repeated row indices are weighted by multiplicity. The result is symmetric
/// to exact equality of stored entries.
pub fn subset_moments(x: &DataMatrix, rows: &[usize], cols: &[usize]) -> Result<(Vec<f64>, SquareMatrix)> {
    if rows.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "covariance needs at least 2 observations, got {}",
            rows.len()
        )));
    }
    let d = cols.len();
    let count = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in rows {
        let row = x.row(i);
        for (m, &j) in mean.iter_mut().zip(cols) {
            *m += row[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);

    let mut cov = SquareMatrix::zeros(d);
    let mut centered = vec![0.0; d];
    for &i in rows {
        let row = x.row(i);
        for (k, &j) in cols.iter().enumerate() {
            centered[k] = row[j] - mean[k];
        }
        for a in 0..d {
            let ca = centered[a];
            let out = &mut cov.values[a * d..a * d + a + 1];
            for (o, cb) in out.iter_mut().zip(&centered[..=a]) {
                *o += ca * cb;
            }
        }
    }
    for a in 0..d {
        for b in 0..=a {
            let v = cov.get(a, b) / count;
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    Ok((mean, cov))
}

/// `log det M` via Cholesky; fails on any non-positive pivot.
pub fn log_det_pd(m: &SquareMatrix) -> Result<f64> {
    Ok(Cholesky::factor(m)?.log_det())
}

/// `(x-μ)ᵀ Σ⁻¹ (x-μ)` through a single Cholesky solve.
pub fn mahalanobis_sq(x: &[f64], mu: &[f64], scatter: &SquareMatrix) -> Result<f64> {
    if x.len() != mu.len() || x.len() != scatter.dim() {
        return Err(Error::Domain(format!(
            "dimension mismatch: x {}, mu {}, scatter {}",
            x.len(),
            mu.len(),
            scatter.dim()
        )));
    }
    let chol = Cholesky::factor(scatter)?;
    let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
    Ok(chol.quadratic_form_inv(&diff))
}
