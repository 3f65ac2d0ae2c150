//! Compressed-row sparse matrices, Jacobi-preconditioned conjugate
//! gradients, and a dense LU solve used as a test oracle.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("entry ({0}, {1}) is outside the sparsity pattern")]
    NotInPattern(usize, usize),
    #[error("diagonal entry {0} is not positive ({1})")]
    NonPositiveDiagonal(usize, f64),
    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {relative_residual:e})")]
    NotConverged {
        iterations: usize,
        relative_residual: f64,
    },
    #[error("matrix is singular (pivot {0})")]
    Singular(usize),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Square sparse matrix in compressed-row form. Column indices are sorted
/// and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    column_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given row patterns; duplicates are removed.
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut column_indices = Vec::new();
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            debug_assert!(row.iter().all(|&c| c < n));
            column_indices.extend_from_slice(row);
            row_offsets.push(column_indices.len());
        }
        let values = vec![0.0; column_indices.len()];
        CsrMatrix {
            n,
            row_offsets,
            column_indices,
            values,
        }
    }

    /// Builds a matrix from `(row, column, value)` triplets, summing
    /// duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![Vec::new(); n];
        for &(i, j, _) in triplets {
            rows[i].push(j);
        }
        let mut m = Self::from_pattern(rows);
        for &(i, j, v) in triplets {
            m.add(i, j, v).expect("entry is in the pattern by construction");
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &triplets)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn column_indices(&self) -> &[usize] {
        &self.column_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.column_indices[r.clone()], &self.values[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| self.row_offsets[i] + k)
    }

    /// Entry `(i, j)`, zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(i, j)`, which must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<(), LinalgError> {
        let k = self.position(i, j).ok_or(LinalgError::NotInPattern(i, j))?;
        self.values[k] += v;
        Ok(())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<(), LinalgError> {
        if x.len() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        if y.len() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, got: y.len() });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &a)| a * x[j]).sum();
        }
        Ok(())
    }

    /// Structural and numerical symmetry up to `rel_tol` relative to the
    /// larger of the two entries.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &a)| match self.position(j, i) {
                Some(k) => {
                    let b = self.values[k];
                    (a - b).abs() <= rel_tol * a.abs().max(b.abs())
                }
                None => false,
            })
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (i, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        dense
    }

    /// Restriction to the rows and columns selected by `keep`, where
    /// `keep[i]` is the new index of row `i` if it is kept.
    pub fn restrict(&self, keep: &[Option<usize>], new_dim: usize) -> CsrMatrix {
        let mut row_offsets = Vec::with_capacity(new_dim + 1);
        row_offsets.push(0);
        let mut column_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n {
            if keep[i].is_none() {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if let Some(jn) = keep[j] {
                    column_indices.push(jn);
                    values.push(v);
                }
            }
            row_offsets.push(column_indices.len());
        }
        CsrMatrix {
            n: new_dim,
            row_offsets,
            column_indices,
            values,
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    /// Required reduction `|b - Ax| <= rel_tolerance |b|`.
    pub rel_tolerance: f64,
    /// Iteration cap; `None` means ten times the dimension.
    pub max_iterations: Option<usize>,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            rel_tolerance: 1e-12,
            max_iterations: None,
        }
    }
}

impl CgConfig {
    fn validate(&self) -> Result<(), LinalgError> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(LinalgError::InvalidConfig("rel_tolerance must lie in (0, 1)"));
        }
        if self.max_iterations == Some(0) {
            return Err(LinalgError::InvalidConfig("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True relative residual `|b - Ax| / |b|` of the returned iterate.
    pub relative_residual: f64,
}

/// Solves `Ax = b` for symmetric positive definite `A` by conjugate
/// gradients with diagonal preconditioning, starting from zero.
///
/// Convergence is declared on the recursively updated residual and then
/// confirmed on the true residual; if the two disagree the iteration is
/// restarted from the true residual.
pub fn solve_cg(a: &CsrMatrix, b: &[f64], config: &CgConfig) -> Result<CgSolution, LinalgError> {
    config.validate()?;
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: b.len() });
    }
    let max_iterations = config.max_iterations.unwrap_or(10 * n.max(1));
    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgSolution { x, iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| if d > 0.0 { Ok(1.0 / d) } else { Err(LinalgError::NonPositiveDiagonal(i, d)) })
        .collect::<Result<_, _>>()?;
    let target = config.rel_tolerance * b_norm;

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    while iterations < max_iterations {
        a.matvec_into(&p, &mut ap)?;
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        if norm2(&r) <= target {
            // confirm on the true residual
            a.matvec_into(&x, &mut ap)?;
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            let true_norm = norm2(&r);
            if true_norm <= target {
                return Ok(CgSolution { x, iterations, relative_residual: true_norm / b_norm });
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    a.matvec_into(&x, &mut ap)?;
    let residual: Vec<f64> = b.iter().zip(&ap).map(|(b, ax)| b - ax).collect();
    Err(LinalgError::NotConverged {
        iterations,
        relative_residual: norm2(&residual) / b_norm,
    })
}

/// Direct solve by dense LU factorization with partial pivoting. Meant for
/// test-sized systems only.
pub fn solve_dense_oracle(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: b.len() });
    }
    let mut m = a.to_dense();
    let mut x = b.to_vec();
    let scale = m.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .expect("non-empty range");
        if m[pivot][k].abs() <= f64::EPSILON * scale * n as f64 || m[pivot][k] == 0.0 {
            return Err(LinalgError::Singular(k));
        }
        m.swap(k, pivot);
        x.swap(k, pivot);
        let (upper, lower) = m.split_at_mut(k + 1);
        let row_k = &upper[k];
        for (off, row) in lower.iter_mut().enumerate() {
            let factor = row[k] / row_k[k];
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                row[j] -= factor * row_k[j];
            }
            x[k + 1 + off] -= factor * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    Ok(x)
}
