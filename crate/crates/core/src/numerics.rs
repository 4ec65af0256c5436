//! Dense-matrix primitives for the analysis layer: the inverse of `I - C`,
//! nonnegativity checks, the dominant eigenvalue of a nonnegative matrix via
//! power iteration, and the column-sum Schur-stability test.
//!
//! Everything here works on small dense matrices (desk scale, n up to a few
//! hundred). All operations are pure functions of their inputs.

use thiserror::Error;

/// Magnitudes below this are treated as exact zeros wherever a sign or a
/// nonnegativity decision is made. Shared by the whole crate so every module
/// rounds the same borderline values the same way.
pub const ZERO_CLAMP: f64 = 1e-12;

/// Default convergence tolerance for [`frobenius_eigenvalue`]: successive
/// radius estimates must differ by less than this.
pub const POWER_TOL: f64 = 1e-10;

/// Default iteration cap for [`frobenius_eigenvalue`].
pub const POWER_MAX_ITER: usize = 10_000;

/// Rounds magnitudes below [`ZERO_CLAMP`] to exact zero, in place. Sign
/// decisions across the crate run on clamped values so that borderline
/// rounding noise never flips a verdict.
pub(crate) fn clamp_tiny_to_zero(values: &mut [f64]) {
    for v in values {
        if v.abs() < ZERO_CLAMP {
            *v = 0.0;
        }
    }
}

/// Errors raised by the numeric primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("column {col} sums to {sum}, which is not strictly below 1")]
    NotSchur { col: usize, sum: f64 },
    #[error("factorization broke down numerically: {0}")]
    Singular(String),
    #[error("entry ({row},{col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("entry ({row},{col}) = {value} is not finite")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("index set is empty")]
    EmptyIndexSet,
    #[error("index {index} appears more than once")]
    DuplicateIndex { index: usize },
    #[error("expected {expected} entries, got {actual}")]
    WrongEntryCount { expected: usize, actual: usize },
    #[error("matrix dimensions must be at least 1x1")]
    EmptyMatrix,
    #[error("row {row} has {actual} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        actual: usize,
    },
}

/// Dense real matrix in row-major order. Entries are always finite; rows and
/// columns are both at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes,
    /// mismatched entry counts, and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        if rows == 0 || cols == 0 {
            return Err(NumericsError::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(NumericsError::WrongEntryCount {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        for (idx, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(NumericsError::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                    value: v,
                });
            }
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from a slice of rows, rejecting ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumericsError> {
        if rows.is_empty() {
            return Err(NumericsError::EmptyMatrix);
        }
        let cols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(NumericsError::RaggedRow {
                    row: i,
                    expected: cols,
                    actual: r.len(),
                });
            }
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::new(rows, cols, vec![0.0; rows * cols]).expect("nonzero dimensions")
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self, NumericsError> {
        Matrix::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols, "index out of bounds");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols, "index out of bounds");
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        debug_assert!(r < self.rows, "row index out of bounds");
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    /// First strictly negative entry, if any, as `(row, col, value)`.
    pub fn first_negative_entry(&self) -> Option<(usize, usize, f64)> {
        self.data
            .iter()
            .position(|&v| v < 0.0)
            .map(|idx| (idx / self.cols, idx % self.cols, self.data[idx]))
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (sum, &value) in sums.iter_mut().zip(self.row(r)) {
                *sum += value;
            }
        }
        sums
    }

    /// Maximum absolute column sum (the induced 1-norm).
    pub fn one_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for c in 0..self.cols {
            let mut s = 0.0;
            for r in 0..self.rows {
                s += self.get(r, c).abs();
            }
            best = best.max(s);
        }
        best
    }

    /// Matrix-vector product. Row dot products accumulate left to right so
    /// results are reproducible bit for bit and monotone in the input vector
    /// when all matrix entries are nonnegative.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = 0.0;
            for c in 0..self.cols {
                acc += row[c] * x[c];
            }
            out.push(acc);
        }
        out
    }

    /// Matrix-matrix product.
    pub fn mul_mat(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "inner dimensions must agree for matrix product"
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self.get(r, k) * other.get(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }
}

/// Result of the power iteration in [`frobenius_eigenvalue`].
///
/// `radius` estimates the dominant (Frobenius) eigenvalue of the input;
/// `eigenvector` is the associated nonnegative direction normalized to unit
/// 1-norm. When `converged` is false the estimate after `iterations` steps is
/// returned as-is.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub radius: f64,
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Inverse of `I - C` for a nonnegative `C` whose column sums are all
/// strictly below 1. Under that condition `I - C` is invertible and the
/// inverse is elementwise nonnegative; entries within [`ZERO_CLAMP`] of zero
/// are clamped to exactly 0 so the nonnegativity is exact.
///
/// Uses LU factorization with partial pivoting followed by one solve per
/// unit vector. The result is verified: if the residual
/// `max row sum of |(I - C) * P - I|` exceeds `1e-10 * n` the factorization
/// is reported as broken instead of returning a bad inverse.
pub fn invert_i_minus_c(c: &Matrix) -> Result<Matrix, NumericsError> {
    if !c.is_square() {
        return Err(NumericsError::NotSquare {
            rows: c.rows(),
            cols: c.cols(),
        });
    }
    if let Some((row, col, value)) = c.first_negative_entry() {
        return Err(NumericsError::NegativeEntry { row, col, value });
    }
    for (col, sum) in c.column_sums().into_iter().enumerate() {
        if sum >= 1.0 {
            return Err(NumericsError::NotSchur { col, sum });
        }
    }
    let n = c.rows();

    // a = I - C, factored in place into L (unit diagonal, below) and U.
    let mut a = Matrix::zeros(n, n);
    for r in 0..n {
        for col in 0..n {
            let v = if r == col {
                1.0 - c.get(r, col)
            } else {
                -c.get(r, col)
            };
            a.set(r, col, v);
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_abs = a.get(k, k).abs();
        for r in (k + 1)..n {
            let v = a.get(r, k).abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        if pivot_abs == 0.0 {
            return Err(NumericsError::Singular(format!("zero pivot at step {k}")));
        }
        if pivot_row != k {
            for col in 0..n {
                let tmp = a.get(k, col);
                a.set(k, col, a.get(pivot_row, col));
                a.set(pivot_row, col, tmp);
            }
            perm.swap(k, pivot_row);
        }
        for r in (k + 1)..n {
            let factor = a.get(r, k) / a.get(k, k);
            a.set(r, k, factor);
            for col in (k + 1)..n {
                a.set(r, col, a.get(r, col) - factor * a.get(k, col));
            }
        }
    }

    // Solve (I - C) x = e_j for each j; x becomes column j of the inverse.
    let mut inv = Matrix::zeros(n, n);
    let mut x = vec![0.0; n];
    for j in 0..n {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = if perm[i] == j { 1.0 } else { 0.0 };
        }
        for r in 1..n {
            let mut acc = x[r];
            for (k, &xk) in x.iter().enumerate().take(r) {
                acc -= a.get(r, k) * xk;
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for (k, &xk) in x.iter().enumerate().skip(r + 1) {
                acc -= a.get(r, k) * xk;
            }
            x[r] = acc / a.get(r, r);
        }
        for (i, &xi) in x.iter().enumerate() {
            inv.set(i, j, if xi.abs() < ZERO_CLAMP { 0.0 } else { xi });
        }
    }

    // Residual check on the clamped result, max absolute row sum of
    // (I - C) * P - I.
    let mut residual = 0.0f64;
    for r in 0..n {
        let mut row_sum = 0.0;
        for col in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                let ic = if r == k {
                    1.0 - c.get(r, k)
                } else {
                    -c.get(r, k)
                };
                acc += ic * inv.get(k, col);
            }
            if r == col {
                acc -= 1.0;
            }
            row_sum += acc.abs();
        }
        residual = residual.max(row_sum);
    }
    if residual > 1e-10 * n as f64 {
        return Err(NumericsError::Singular(format!(
            "inverse residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(inv)
}

/// Dominant (Frobenius) eigenvalue of a square nonnegative matrix by power
/// iteration, together with the associated nonnegative eigenvector.
///
/// The iteration runs on `M + I` rather than `M` itself: adding the identity
/// shifts every eigenvalue by one without changing the eigenvectors, and it
/// makes the iteration converge for matrices with periodic structure (for
/// example `[0, a; b, 0]`, on which the unshifted iteration oscillates
/// forever). The radius of `M` is recovered by subtracting the shift.
///
/// Starts from the uniform vector so results are reproducible. Convergence
/// means two successive radius estimates differ by less than `tol`;
/// exhausting `max_iter` is reported via `converged = false`, never as an
/// error.
pub fn frobenius_eigenvalue(
    m: &Matrix,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralResult, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if let Some((row, col, value)) = m.first_negative_entry() {
        return Err(NumericsError::NegativeEntry { row, col, value });
    }
    let n = m.rows();
    let mut x = vec![1.0 / n as f64; n];
    let mut prev_est = f64::INFINITY;
    let mut est = 0.0;
    for it in 1..=max_iter {
        let mut y = m.mul_vec(&x);
        for (yi, xi) in y.iter_mut().zip(x.iter()) {
            *yi += xi;
        }
        // x is nonnegative with unit 1-norm, so the 1-norm of y is its plain
        // sum and is at least 1; the quotient estimates the radius of M + I.
        let norm: f64 = y.iter().sum();
        est = norm - 1.0;
        for (xi, &yi) in x.iter_mut().zip(y.iter()) {
            *xi = yi / norm;
        }
        if (est - prev_est).abs() < tol {
            return Ok(SpectralResult {
                radius: est.max(0.0),
                eigenvector: x,
                iterations: it,
                converged: true,
            });
        }
        prev_est = est;
    }
    Ok(SpectralResult {
        radius: est.max(0.0),
        eigenvector: x,
        iterations: max_iter,
        converged: false,
    })
}

/// True when every column of the square nonnegative matrix sums to strictly
/// less than 1. This is the sufficient Schur-stability condition the model
/// places on the cross-holdings matrix: total outside ownership of each
/// organization stays below its full equity.
pub fn is_schur_by_column_sums(c: &Matrix) -> Result<bool, NumericsError> {
    if !c.is_square() {
        return Err(NumericsError::NotSquare {
            rows: c.rows(),
            cols: c.cols(),
        });
    }
    if let Some((row, col, value)) = c.first_negative_entry() {
        return Err(NumericsError::NegativeEntry { row, col, value });
    }
    Ok(c.column_sums().into_iter().all(|s| s < 1.0))
}

/// The principal submatrix `M[indices, indices]`, rows and columns both
/// restricted to the given index set, in the given order. Indices must be
/// nonempty, distinct, and in range.
pub fn principal_submatrix(m: &Matrix, indices: &[usize]) -> Result<Matrix, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if indices.is_empty() {
        return Err(NumericsError::EmptyIndexSet);
    }
    let n = m.rows();
    let mut seen = vec![false; n];
    for &i in indices {
        if i >= n {
            return Err(NumericsError::IndexOutOfRange { index: i, size: n });
        }
        if seen[i] {
            return Err(NumericsError::DuplicateIndex { index: i });
        }
        seen[i] = true;
    }
    let k = indices.len();
    let mut out = Matrix::zeros(k, k);
    for (r, &i) in indices.iter().enumerate() {
        for (c, &j) in indices.iter().enumerate() {
            out.set(r, c, m.get(i, j));
        }
    }
    Ok(out)
}
