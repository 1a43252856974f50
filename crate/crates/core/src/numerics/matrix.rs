//! Dense row-major matrix over a generic scalar.

use crate::numerics::NumericsError;
use crate::scalar::Scalar;

/// Dense matrix with row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::Contract(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::Contract(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self, NumericsError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(NumericsError::Contract("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `r` as a slice.
    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Column `c` as an owned vector.
    pub fn col(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    /// Nested-row copy, used at serialization boundaries.
    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == S::zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .fold(S::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    /// Largest absolute entry; zero for empty matrices.
    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .map(|v| v.abs())
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    /// Checks symmetry within `tol` on a square matrix.
    pub fn is_symmetric(&self, tol: S) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                if (self[(r, c)] - self[(c, r)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Per-column means.
    pub fn column_means(&self) -> Vec<S> {
        let n = S::count(self.rows.max(1));
        (0..self.cols)
            .map(|c| {
                (0..self.rows)
                    .map(|r| self[(r, c)])
                    .fold(S::zero(), |a, b| a + b)
                    / n
            })
            .collect()
    }

    /// Sample covariance (divisor `rows - 1`) of the columns.
    pub fn sample_covariance(&self) -> Self {
        assert!(self.rows >= 2, "covariance needs at least two rows");
        let means = self.column_means();
        let denom = S::count(self.rows - 1);
        let mut cov = Self::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = S::zero();
                for r in 0..self.rows {
                    acc += (self[(r, i)] - means[i]) * (self[(r, j)] - means[j]);
                }
                let v = acc / denom;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        cov
    }
}

impl<S: Scalar> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (r, c): (usize, usize)) -> &S {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<S: Scalar> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_bad_shape_and_nonfinite() {
        assert!(Matrix::from_vec(2, 2, vec![1.0f64; 3]).is_err());
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::from_vec(2, 2, vec![1.0; 4]).is_ok());
    }

    #[test]
    fn matmul_identity_is_noop() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let id = Matrix::identity(2);
        assert_eq!(m.matmul(&id), m);
        assert_eq!(id.matmul(&m), m);
    }

    #[test]
    fn transpose_roundtrip() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose()[(2, 1)], 6.0);
    }

    #[test]
    fn covariance_of_two_point_column() {
        let m = Matrix::from_rows(&[vec![1.0f64], vec![3.0]]).unwrap();
        let cov = m.sample_covariance();
        assert!((cov[(0, 0)] - 2.0).abs() < 1e-12);
    }
}
