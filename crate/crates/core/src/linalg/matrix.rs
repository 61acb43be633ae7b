use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use super::roots;
use crate::error::{Error, Result};

/// Dense real matrix with finite entries.
///
/// Thin wrapper around [`nalgebra::DMatrix`]; it (de)serializes as a list of
/// rows, e.g. `[[0, 1], [-1, -1.4]]`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("entries", format!("non-finite entry {bad}")));
        }
        Ok(Matrix(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(rows.len(), cols, &flat)
    }

    pub fn identity(n: usize) -> Self {
        Matrix(DMatrix::identity(n, n))
    }

    pub fn scaled_identity(n: usize, value: f64) -> Self {
        Matrix(DMatrix::identity(n, n) * value)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix(DMatrix::zeros(rows, cols))
    }

    /// Column vector.
    pub fn column(v: &[f64]) -> Self {
        Matrix(DMatrix::from_column_slice(v.len(), 1, v))
    }

    pub(crate) fn from_dmatrix(m: DMatrix<f64>) -> Self {
        Matrix(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix(self.0.transpose())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Matrix(&self.0 * &other.0))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols(), "vector length must match column count");
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Writes `self * v` into `out` without allocating.
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, vj) in v.iter().enumerate() {
                acc += self.0[(i, j)] * vj;
            }
            *o = acc;
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        Ok(Matrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        Ok(Matrix(&self.0 - &other.0))
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix(&self.0 * factor)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Solves `self * x = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if !self.is_square() || rhs.len() != self.rows() {
            return Err(Error::DimensionMismatch(
                "solve needs a square matrix and a matching right-hand side".into(),
            ));
        }
        let lu = self.0.clone().lu();
        let x = lu
            .solve(&nalgebra::DVector::from_column_slice(rhs))
            .ok_or_else(|| Error::SingularSystem("LU factorization has a zero pivot".into()))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem("solution is not finite".into()));
        }
        Ok(x.as_slice().to_vec())
    }

    /// Matrix exponential `e^{self}`.
    pub fn exp(&self) -> Matrix {
        Matrix(self.0.clone().exp())
    }

    /// Eigenvalues of a symmetric matrix in ascending order.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Leading principal minors `det(M[..i, ..i])` for `i = 1..=n`.
    pub fn leading_principal_minors(&self) -> Vec<f64> {
        (1..=self.rows())
            .map(|i| self.0.view((0, 0), (i, i)).into_owned().determinant())
            .collect()
    }

    pub fn characteristic_polynomial(&self) -> Polynomial {
        leverrier_faddeev(self).char_poly
    }

    /// Hurwitz test through the roots of the characteristic polynomial.
    pub fn is_hurwitz(&self) -> Result<bool> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("Hurwitz test needs a square matrix".into()));
        }
        if self.rows() == 0 {
            return Ok(true);
        }
        roots::is_hurwitz(&self.characteristic_polynomial())
    }

    pub(crate) fn require_hurwitz(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("expected a square matrix".into()));
        }
        if self.rows() == 0 {
            return Ok(());
        }
        let r = roots::poly_roots(&self.characteristic_polynomial())?;
        let max_re = r.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if max_re < -roots::HURWITZ_MARGIN {
            Ok(())
        } else {
            Err(Error::NotHurwitz {
                max_real_part: max_re,
            })
        }
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Matrix").field(&self.to_rows()).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

/// Characteristic polynomial and adjugate coefficients of `sI - A`.
#[derive(Clone, Debug)]
pub struct Resolvent {
    /// `det(sI - A)`, monic.
    pub char_poly: Polynomial,
    /// `adj(sI - A) = sum_i adj_coeffs[i] * s^i` (ascending powers).
    pub adj_coeffs: Vec<Matrix>,
}

impl Resolvent {
    /// Polynomial entries of `adj(sI - A) * v`.
    pub fn adjugate_times(&self, v: &[f64]) -> Vec<Polynomial> {
        let n = self.adj_coeffs.first().map_or(0, Matrix::rows);
        let per_power: Vec<Vec<f64>> = self.adj_coeffs.iter().map(|m| m.mul_vec(v)).collect();
        (0..n)
            .map(|i| Polynomial::new(per_power.iter().map(|c| c[i]).collect()))
            .collect()
    }

    /// Polynomial entries of `M * adj(sI - A)`, row by row.
    pub fn left_multiplied(&self, m: &Matrix) -> Result<Vec<Vec<Polynomial>>> {
        let products = self
            .adj_coeffs
            .iter()
            .map(|c| m.matmul(c))
            .collect::<Result<Vec<_>>>()?;
        let (rows, cols) = (m.rows(), self.adj_coeffs.first().map_or(0, Matrix::cols));
        Ok((0..rows)
            .map(|i| {
                (0..cols)
                    .map(|j| Polynomial::new(products.iter().map(|p| p[(i, j)]).collect()))
                    .collect()
            })
            .collect())
    }
}

/// Leverrier–Faddeev recursion for `det(sI - A)` and `adj(sI - A)`.
///
/// With `M_1 = I`, `M_k = A M_{k-1} + c_{n-k+1} I` and
/// `c_{n-k} = -tr(A M_k) / k`, the adjugate is `sum_k M_k s^{n-k}`.
pub fn leverrier_faddeev(a: &Matrix) -> Resolvent {
    assert!(a.is_square(), "Leverrier-Faddeev needs a square matrix");
    let n = a.rows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut adj_desc: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    let eye = DMatrix::<f64>::identity(n, n);
    let mut m_prev = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        let m_k = &a.0 * &m_prev + &eye * c[n - k + 1];
        c[n - k] = -(&a.0 * &m_k).trace() / k as f64;
        adj_desc.push(m_k.clone());
        m_prev = m_k;
    }
    // adj_desc[k-1] multiplies s^{n-k}; reverse into ascending powers.
    let adj_coeffs = adj_desc.into_iter().rev().map(Matrix).collect();
    Resolvent {
        char_poly: Polynomial::new(c),
        adj_coeffs,
    }
}
