//! Inter-feature correlation analysis and removal.
//!
//! Whitening maps a centered `r x K` matrix `D` onto `T = D (D'D)^(-1/2)`,
//! where the exponent is the symmetric matrix inverse square root taken via
//! eigendecomposition of `D'D`. The columns of `T` are exactly
//! uncorrelated (`T'T = I`). The reverse operation multiplies uncorrelated
//! columns by the transpose of the lower Cholesky factor of a target
//! correlation matrix, imposing that structure empirically.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{FeatureDataset, SESSION_COUNT};
use crate::error::{Error, Result};
use crate::stats;

/// `r x K` column-major matrix: the two session blocks of a dataset stacked
/// vertically (`r = 2N`), one column per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n_rows: usize,
    column_names: Vec<String>,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(column_names: Vec<String>, n_rows: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * column_names.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for {n_rows} rows x {} columns, got {}",
                n_rows * column_names.len(),
                column_names.len(),
                values.len()
            )));
        }
        Ok(Self {
            n_rows,
            column_names,
            values,
        })
    }

    pub fn from_columns(column_names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::ShapeMismatch("ragged columns".into()));
        }
        let mut values = Vec::with_capacity(n_rows * columns.len());
        for col in &columns {
            values.extend_from_slice(col);
        }
        Self::new(column_names, n_rows, values)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.values[c * self.n_rows..(c + 1) * self.n_rows]
    }

    /// Copies the named columns into a new matrix, in the given order.
    pub fn select(&self, names: &[String]) -> Result<DataMatrix> {
        let columns = names
            .iter()
            .map(|name| {
                self.column_names
                    .iter()
                    .position(|c| c == name)
                    .map(|i| self.column(i).to_vec())
                    .ok_or_else(|| Error::UnknownFeature(name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        DataMatrix::from_columns(names.to_vec(), columns)
    }
}

/// Stacks the two session blocks of a dataset into an `2N x K` matrix.
pub fn dataset_to_matrix(dataset: &FeatureDataset) -> DataMatrix {
    DataMatrix {
        n_rows: dataset.n_subjects() * SESSION_COUNT,
        column_names: dataset.feature_names().to_vec(),
        values: dataset.values().to_vec(),
    }
}

/// Splits an `2N x K` matrix back into a two-session dataset.
pub fn matrix_to_dataset(
    matrix: &DataMatrix,
    subject_ids: Vec<String>,
    session_ids: Vec<String>,
) -> Result<FeatureDataset> {
    if matrix.n_rows != subject_ids.len() * SESSION_COUNT {
        return Err(Error::ShapeMismatch(format!(
            "{} rows cannot split into {} subjects x {SESSION_COUNT} sessions",
            matrix.n_rows,
            subject_ids.len()
        )));
    }
    FeatureDataset::new(
        subject_ids,
        session_ids,
        matrix.column_names.clone(),
        matrix.values.clone(),
    )
}

/// Subtracts each column's mean. Column means of the output are 0 within
/// 1e-12 of the column scale.
pub fn center_columns(matrix: &DataMatrix) -> DataMatrix {
    let mut values = matrix.values.clone();
    for chunk in values.chunks_mut(matrix.n_rows.max(1)) {
        if chunk.is_empty() {
            continue;
        }
        let mean = stats::mean(chunk);
        chunk.iter_mut().for_each(|x| *x -= mean);
    }
    DataMatrix {
        n_rows: matrix.n_rows,
        column_names: matrix.column_names.clone(),
        values,
    }
}

/// Relative eigenvalue floor below which `D'D` is treated as singular.
const RANK_EPS: f64 = 1e-10;

/// `T = D (D'D)^(-1/2)` for a centered full-column-rank `D`.
///
/// Postconditions: `T'T = I` within 1e-8 and all pairwise column
/// correlations of `T` vanish. Near-singular `D'D` (smallest eigenvalue
/// below `1e-10` of the largest, including the `r <= K` case) is an error
/// reporting how many column directions are deficient.
pub fn whiten(matrix: &DataMatrix) -> Result<DataMatrix> {
    let r = matrix.n_rows;
    let k = matrix.n_cols();
    if k == 0 {
        return Err(Error::ShapeMismatch(
            "whiten needs at least one column".into(),
        ));
    }
    if r < k + 1 {
        return Err(Error::RankDeficient {
            deficient: k + 1 - r,
            columns: k,
        });
    }
    let scale = matrix.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for c in 0..k {
        let mean = stats::mean(matrix.column(c));
        if mean.abs() > 1e-8 * (1.0 + scale) {
            return Err(Error::Domain(format!(
                "whiten requires centered columns; column {:?} has mean {mean:.3e}",
                matrix.column_names[c]
            )));
        }
    }

    let gram = gram_matrix(matrix);
    let eigen = DMatrix::from_vec(k, k, gram).symmetric_eigen();
    let lambda_max = eigen.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let deficient = eigen
        .eigenvalues
        .iter()
        .filter(|&&l| l < RANK_EPS * lambda_max || l <= 0.0)
        .count();
    if deficient > 0 {
        return Err(Error::RankDeficient {
            deficient,
            columns: k,
        });
    }

    // M = V diag(lambda^-1/2) V'
    let mut m = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let mut sum = 0.0;
            for (e, lambda) in eigen.eigenvalues.iter().enumerate() {
                sum += eigen.eigenvectors[(a, e)] * eigen.eigenvectors[(b, e)] / lambda.sqrt();
            }
            m[a * k + b] = sum;
            m[b * k + a] = sum;
        }
    }

    // T = D M, column by column.
    let values: Vec<f64> = (0..k)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut out = vec![0.0; r];
            for l in 0..k {
                let w = m[l * k + c];
                if w != 0.0 {
                    let col = matrix.column(l);
                    for (o, x) in out.iter_mut().zip(col) {
                        *o += w * x;
                    }
                }
            }
            out
        })
        .collect();
    DataMatrix::new(matrix.column_names.clone(), r, values)
}

fn gram_matrix(matrix: &DataMatrix) -> Vec<f64> {
    let k = matrix.n_cols();
    let mut gram = vec![0.0; k * k];
    let entries: Vec<(usize, usize, f64)> = (0..k)
        .into_par_iter()
        .flat_map_iter(|a| {
            let ca = matrix.column(a);
            (a..k).map(move |b| {
                let dot: f64 = ca.iter().zip(matrix.column(b)).map(|(x, y)| x * y).sum();
                (a, b, dot)
            })
        })
        .collect();
    for (a, b, dot) in entries {
        gram[a * k + b] = dot;
        gram[b * k + a] = dot;
    }
    gram
}

/// Symmetric matrix with unit diagonal, used both as a whitening summary
/// and as an induction target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    dim: usize,
    /// Row-major `dim x dim` entries.
    values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn from_values(dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                values.len()
            )));
        }
        Ok(Self { dim, values })
    }

    pub fn identity(dim: usize) -> Self {
        let mut values = vec![0.0; dim * dim];
        for i in 0..dim {
            values[i * dim + i] = 1.0;
        }
        Self { dim, values }
    }

    /// Uniform off-diagonal correlation `rho`.
    pub fn exchangeable(dim: usize, rho: f64) -> Self {
        let mut values = vec![rho; dim * dim];
        for i in 0..dim {
            values[i * dim + i] = 1.0;
        }
        Self { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    fn off_diagonal_abs(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * (self.dim - 1) / 2);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                out.push(self.get(i, j).abs());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    pub matrix: CorrelationMatrix,
    /// Median of the absolute strictly-off-diagonal entries (0 when K = 1).
    pub median_abs_offdiag: f64,
    pub max_abs_offdiag: f64,
}

/// Pearson correlations over rows, with summaries of the off-diagonal
/// absolute values.
pub fn correlation_matrix(matrix: &DataMatrix) -> Result<CorrelationSummary> {
    let r = matrix.n_rows;
    let k = matrix.n_cols();
    if r < 3 {
        return Err(Error::Domain(format!(
            "correlation needs at least 3 rows, got {r}"
        )));
    }
    // Standardize once (population SD; the sample/population factor cancels
    // in the correlation), then corr(a, b) = z_a . z_b / r.
    let standardized: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let col = matrix.column(c);
            let mean = stats::mean(col);
            let sd = stats::population_sd(col, mean);
            if sd == 0.0 {
                return Err(Error::DegenerateFeature(matrix.column_names[c].clone()));
            }
            Ok(col.iter().map(|x| (x - mean) / sd).collect())
        })
        .collect::<Result<_>>()?;

    let mut values = vec![0.0; k * k];
    let entries: Vec<(usize, usize, f64)> = (0..k)
        .into_par_iter()
        .flat_map_iter(|a| {
            let za = &standardized[a];
            let sz = &standardized;
            (a + 1..k).map(move |b| {
                let dot: f64 = za.iter().zip(&sz[b]).map(|(x, y)| x * y).sum();
                (a, b, dot / r as f64)
            })
        })
        .collect();
    for (a, b, c) in entries {
        values[a * k + b] = c;
        values[b * k + a] = c;
    }
    for i in 0..k {
        values[i * k + i] = 1.0;
    }
    let matrix = CorrelationMatrix { dim: k, values };
    let mut abs = matrix.off_diagonal_abs();
    let (median_abs_offdiag, max_abs_offdiag) = if abs.is_empty() {
        (0.0, 0.0)
    } else {
        abs.sort_unstable_by(f64::total_cmp);
        (stats::median_sorted(&abs), *abs.last().unwrap())
    };
    Ok(CorrelationSummary {
        matrix,
        median_abs_offdiag,
        max_abs_offdiag,
    })
}

/// Imposes `target` on near-uncorrelated columns via the forward Cholesky
/// transform `X L'`, then re-z-scores every column (population SD) so
/// downstream ICC and similarity code sees the standard normalization.
pub fn induce_correlation(matrix: &DataMatrix, target: &CorrelationMatrix) -> Result<DataMatrix> {
    let k = matrix.n_cols();
    if target.dim != k {
        return Err(Error::ShapeMismatch(format!(
            "target correlation is {}x{} but the matrix has {k} columns",
            target.dim, target.dim
        )));
    }
    for i in 0..k {
        if (target.get(i, i) - 1.0).abs() > 1e-9 {
            return Err(Error::Decomposition(format!(
                "target correlation must have a unit diagonal; entry ({i},{i}) is {}",
                target.get(i, i)
            )));
        }
        for j in (i + 1)..k {
            if (target.get(i, j) - target.get(j, i)).abs() > 1e-9 {
                return Err(Error::Decomposition(format!(
                    "target correlation must be symmetric; entries ({i},{j}) and ({j},{i}) differ"
                )));
            }
        }
    }
    let chol = nalgebra::Cholesky::new(DMatrix::from_fn(k, k, |i, j| target.get(i, j)))
        .ok_or_else(|| {
            Error::Decomposition("target correlation matrix is not positive definite".into())
        })?;
    let l = chol.l();

    let r = matrix.n_rows;
    let values: Vec<f64> = (0..k)
        .into_par_iter()
        .flat_map_iter(|j| {
            // column j of X L' mixes source columns 0..=j
            let mut out = vec![0.0; r];
            for src in 0..=j {
                let w = l[(j, src)];
                if w != 0.0 {
                    for (o, x) in out.iter_mut().zip(matrix.column(src)) {
                        *o += w * x;
                    }
                }
            }
            let mean = stats::mean(&out);
            let sd = stats::population_sd(&out, mean);
            out.into_iter().map(move |x| (x - mean) / sd)
        })
        .collect();
    for (c, chunk) in values.chunks(r).enumerate() {
        if chunk.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateFeature(matrix.column_names[c].clone()));
        }
    }
    DataMatrix::new(matrix.column_names.clone(), r, values)
}
