//! Small dense row-major matrix used by the input-output routines.
//!
//! Sizes here are desk scale (a few hundred sectors at most), so everything is
//! plain `Vec<f64>` storage with straightforward loops.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix is singular (zero pivot in column {column})")]
    Singular { column: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::Dimension {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(MatrixError::Dimension {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::Dimension {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, o) in dst.iter_mut().zip(orow) {
                    *d += aik * o;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Self, MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::Dimension {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Matrix) -> Result<Self, MatrixError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Self, MatrixError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute column sum (induced 1-norm).
    pub fn norm_1(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Same matrix with rows and columns both reordered: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        let n = perm.len();
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(perm[i], perm[j])];
            }
        }
        out
    }

    pub fn lu(&self) -> Result<Lu, MatrixError> {
        Lu::factor(self)
    }

    pub fn inverse(&self) -> Result<Self, MatrixError> {
        self.lu()?.inverse()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// LU factorization with partial (row) pivoting: `P·M = L·U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    // L below the diagonal (unit diagonal implied), U on and above it.
    packed: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &Matrix) -> Result<Self, MatrixError> {
        if !m.is_square() {
            return Err(MatrixError::Dimension {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let n = m.rows();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.max_abs().max(f64::MIN_POSITIVE);

        for k in 0..n {
            let (pivot_row, pivot_abs) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= scale * f64::EPSILON * n as f64 {
                return Err(MatrixError::Singular { column: k });
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= factor * ukj;
                }
            }
        }
        Ok(Self { n, packed: lu, perm })
    }

    /// Solves `M·x = b` for one right-hand side.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.packed[(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.packed[(i, k)] * x[k];
            }
            x[i] = s / self.packed[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        let n = self.n;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        Ok(inv)
    }

    pub fn determinant(&self) -> f64 {
        let mut det: f64 = (0..self.n).map(|i| self.packed[(i, i)]).product();
        // parity of the permutation
        let mut seen = vec![false; self.n];
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.perm[j];
                len += 1;
            }
            if len % 2 == 0 {
                det = -det;
            }
        }
        det
    }
}

/// Bounds on the spectral radius of a non-negative square matrix.
///
/// Runs power iteration on `M + I` (primitive whenever `M` is irreducible, and
/// its dominant eigenvalue is `rho(M) + 1`) and keeps the Collatz-Wielandt
/// bracket `min_i (Mx)_i / x_i <= rho(M) <= max_i (Mx)_i / x_i`, valid for any
/// strictly positive `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBracket {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

impl SpectralBracket {
    pub fn estimate(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Iterates until the bracket is narrower than `tol`, or until it is decided
/// on which side of `threshold` the radius lies, or `max_iter` is reached.
pub fn spectral_bracket_nonneg(m: &Matrix, threshold: Option<f64>, tol: f64, max_iter: usize) -> SpectralBracket {
    let n = m.rows();
    let mut x = vec![1.0; n];
    let mut bracket = SpectralBracket {
        lower: 0.0,
        upper: f64::INFINITY,
        iterations: 0,
    };
    for it in 0..max_iter {
        let mx = m.mul_vec(&x);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for (num, den) in mx.iter().zip(&x) {
            let r = num / den;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        bracket = SpectralBracket {
            lower: bracket.lower.max(lo),
            upper: bracket.upper.min(hi),
            iterations: it + 1,
        };
        let decided = threshold.is_some_and(|t| bracket.upper < t || bracket.lower >= t);
        if decided || bracket.upper - bracket.lower < tol {
            break;
        }
        // x <- (M + I) x, renormalized; stays strictly positive
        let norm = mx.iter().zip(&x).map(|(a, b)| a + b).fold(0.0, f64::max);
        for (xi, mi) in x.iter_mut().zip(&mx) {
            *xi = (*xi + mi) / norm;
            if *xi < f64::MIN_POSITIVE {
                *xi = f64::MIN_POSITIVE;
            }
        }
    }
    bracket
}
