//! Dense real matrices, symmetric positive definite matrices and the block
//! bookkeeping shared by every distribution family.
//!
//! Orders here are small (a handful of columns), so everything is dense and
//! backed by `nalgebra::DMatrix`.

use nalgebra::DMatrix;

use crate::error::{shape, Error, Result};

/// Relative symmetry tolerance: `|a_ij - a_ji| <= SYMMETRY_TOL * max|a|`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Relative pivot tolerance of the Cholesky factorization used to certify
/// positive definiteness.
pub const PIVOT_TOL: f64 = 1e-12;

/// A finite, dense, real `rows x cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    inner: DMatrix<f64>,
}

impl RealMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return shape(format!("matrix dimensions must be positive, got {rows}x{cols}"));
        }
        if entries.len() != rows * cols {
            return shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            ));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != ncols) {
            return shape("ragged rows");
        }
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_row_major(nrows, ncols, &flat)
    }

    pub fn from_dmatrix(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return shape("matrix dimensions must be positive");
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                if !inner[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { inner })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::from_row_major(1, 1, &[value])
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.inner
    }

    /// Entries as nested rows.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).collect()).collect()
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.to_rows().into_iter().flatten().collect()
    }

    /// `tr(X'X)`, the squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.inner.iter().map(|x| x * x).sum()
    }

    /// `c * X`. Panics if the result leaves the finite range.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = &self.inner * c;
        assert!(inner.iter().all(|x| x.is_finite()), "scaling produced non-finite entries");
        Self { inner }
    }

    /// The Gram product `X'X` as an SPD matrix of order `cols`.
    ///
    /// The product is symmetrized before the definiteness check.
    pub fn gram(&self) -> Result<SpdMatrix> {
        SpdMatrix::from_dmatrix_symmetrized(self.inner.transpose() * &self.inner)
    }
}

/// A symmetric positive definite matrix together with its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    inner: DMatrix<f64>,
    // lower triangular, `inner = chol * chol'`
    chol: DMatrix<f64>,
}

impl SpdMatrix {
    /// Validates symmetry (relative tolerance) and positive definiteness.
    pub fn new(matrix: RealMatrix) -> Result<Self> {
        let a = matrix.into_dmatrix();
        if a.nrows() != a.ncols() {
            return shape(format!("SPD matrix must be square, got {}x{}", a.nrows(), a.ncols()));
        }
        let scale = a.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
        let n = a.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (a[(i, j)] - a[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        Self::from_dmatrix_symmetrized(a)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(RealMatrix::from_rows(rows)?)
    }

    pub fn identity(order: usize) -> Self {
        Self::from_dmatrix_symmetrized(DMatrix::identity(order, order)).expect("identity is positive definite")
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values));
        Self::new(RealMatrix::from_dmatrix(d)?)
    }

    pub(crate) fn from_dmatrix_symmetrized(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return shape("SPD matrix must be square and non-empty");
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        let sym = (&a + a.transpose()) * 0.5;
        let chol = cholesky(&sym)?;
        Ok(Self { inner: sym, chol })
    }

    pub fn order(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix { inner: self.inner.clone() }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.to_real().to_rows()
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    /// `ln |W|` from the Cholesky diagonal.
    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// `W^{-1}` via the Cholesky factor.
    pub fn inverse(&self) -> Result<SpdMatrix> {
        let n = self.order();
        Self::from_dmatrix_symmetrized(self.solve(&DMatrix::identity(n, n)))
    }

    /// `tr(W^{-1} M)` for a square `M` of the same order.
    pub fn solve_trace(&self, m: &DMatrix<f64>) -> f64 {
        self.solve(m).trace()
    }

    /// Solves `W Z = M` for `Z`.
    pub fn solve(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let y = self.chol.solve_lower_triangular(m).expect("Cholesky diagonal is positive");
        self.chol.tr_solve_lower_triangular(&y).expect("Cholesky diagonal is positive")
    }
}

fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let max_diag = (0..n).fold(0.0_f64, |s, i| s.max(a[(i, i)]));
    if max_diag <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let threshold = PIVOT_TOL * max_diag;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > threshold) {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Row-block layout `(n_0, ..., n_k)` of an `N x m` spherical matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockStructure {
    block_rows: Vec<usize>,
    cols: usize,
}

impl BlockStructure {
    /// Requires at least one block and `n_i >= m >= 1` for every block.
    pub fn new(block_rows: Vec<usize>, cols: usize) -> Result<Self> {
        if cols == 0 {
            return shape("column count m must be at least 1");
        }
        if block_rows.is_empty() {
            return shape("at least the anchor block n_0 is required");
        }
        if let Some((i, n)) = block_rows.iter().enumerate().find(|(_, &n)| n < cols) {
            return shape(format!("block {i} has {n} rows, fewer than m = {cols}"));
        }
        Ok(Self { block_rows, cols })
    }

    pub fn block_rows(&self) -> &[usize] {
        &self.block_rows
    }

    /// Row count `n_i` of block `i`.
    pub fn rows(&self, i: usize) -> usize {
        self.block_rows[i]
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of blocks beyond the anchor block.
    pub fn k(&self) -> usize {
        self.block_rows.len() - 1
    }

    pub fn total_rows(&self) -> usize {
        self.block_rows.iter().sum()
    }

    /// Total dimension `N m` of the spherical law.
    pub fn dim(&self) -> usize {
        self.total_rows() * self.cols
    }

    pub(crate) fn check_block(&self, i: usize, x: &RealMatrix) -> Result<()> {
        if x.rows() != self.block_rows[i] || x.cols() != self.cols {
            return shape(format!(
                "block {i} is {}x{}, structure expects {}x{}",
                x.rows(),
                x.cols(),
                self.block_rows[i],
                self.cols
            ));
        }
        Ok(())
    }

    pub(crate) fn check_order(&self, i: usize, w: &SpdMatrix) -> Result<()> {
        if w.order() != self.cols {
            return shape(format!("block {i} has order {}, expected m = {}", w.order(), self.cols));
        }
        Ok(())
    }
}
