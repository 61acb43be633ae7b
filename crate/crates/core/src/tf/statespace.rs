use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::rational::RationalTf;

/// Single-input realization `x' = A x + B u`, `y = C x + D u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    pub a: Matrix,
    pub b: Vec<f64>,
    /// One row per output.
    pub c: Matrix,
    /// One entry per output.
    pub d: Vec<f64>,
}

impl StateSpace {
    pub fn new(a: Matrix, b: Vec<f64>, c: Matrix, d: Vec<f64>) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() || b.len() != n || c.cols() != n || c.rows() != d.len() {
            return Err(Error::DimensionMismatch(format!(
                "A {}x{}, B {}, C {}x{}, D {}",
                a.rows(),
                a.cols(),
                b.len(),
                c.rows(),
                c.cols(),
                d.len()
            )));
        }
        Ok(StateSpace { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.rows()
    }

    pub fn outputs(&self) -> usize {
        self.d.len()
    }

    /// `C (sI - A)^{-1} B + D` by a complex LU solve.
    pub fn evaluate(&self, s: Complex64) -> Result<Vec<Complex64>> {
        let n = self.order();
        let mut out: Vec<Complex64> = self.d.iter().map(|&d| Complex64::new(d, 0.0)).collect();
        if n == 0 {
            return Ok(out);
        }
        let a = self.a.as_dmatrix();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - a[(i, j)]
        });
        let rhs = DVector::from_iterator(n, self.b.iter().map(|&v| Complex64::new(v, 0.0)));
        let x = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem(format!("sI - A is singular at s = {s}")))?;
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..n {
                *o += self.c[(i, j)] * x[j];
            }
        }
        Ok(out)
    }

    /// Diagonal similarity `T^{-1} A T` with power-of-two scalings chosen so
    /// that rows and columns of `A` have comparable norms (Parlett–Reinsch).
    /// `B` and `C` are transformed accordingly; the transfer function is
    /// unchanged up to rounding.
    pub fn balanced(&self) -> StateSpace {
        let n = self.order();
        if n <= 1 {
            return self.clone();
        }
        let mut a = self.a.as_dmatrix().clone();
        let mut scale = vec![1.0f64; n];
        const RADIX: f64 = 2.0;
        loop {
            let mut converged = true;
            for i in 0..n {
                let (mut c, mut r) = (0.0, 0.0);
                for j in 0..n {
                    if j != i {
                        c += a[(j, i)].abs();
                        r += a[(i, j)].abs();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let total = c + r;
                let mut f = 1.0;
                let (mut cc, mut rr) = (c, r);
                while cc < rr / RADIX {
                    f *= RADIX;
                    cc *= RADIX;
                    rr /= RADIX;
                }
                while cc >= rr * RADIX {
                    f /= RADIX;
                    cc /= RADIX;
                    rr *= RADIX;
                }
                if (cc + rr) < 0.95 * total {
                    converged = false;
                    scale[i] *= f;
                    for j in 0..n {
                        a[(i, j)] /= f;
                        a[(j, i)] *= f;
                    }
                }
            }
            if converged {
                break;
            }
        }
        let b = self.b.iter().zip(&scale).map(|(v, t)| v / t).collect();
        let c = DMatrix::from_fn(self.c.rows(), n, |i, j| self.c[(i, j)] * scale[j]);
        StateSpace {
            a: Matrix::from_dmatrix(a),
            b,
            c: Matrix::from_dmatrix(c),
            d: self.d.clone(),
        }
    }
}

/// Controllable canonical realization of a proper transfer function.
///
/// With monic `den = s^n + a_{n-1} s^{n-1} + ... + a_0` and strictly proper
/// remainder `b_{n-1} s^{n-1} + ... + b_0`, `A` is the companion matrix with
/// last row `-a`, `B = e_n` and `C = b`.
pub fn tf_to_statespace(tf: &RationalTf) -> Result<StateSpace> {
    let sp = tf.strictly_proper_part()?;
    let d = tf.feedthrough();
    let n = tf.den().degree();
    let den = tf.den().coeffs();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -den[j];
    }
    let mut b = vec![0.0; n];
    if n > 0 {
        b[n - 1] = 1.0;
    }
    let c = DMatrix::from_fn(1, n, |_, j| sp.num().coeff(j));
    Ok(StateSpace {
        a: Matrix::from_dmatrix(a),
        b,
        c: Matrix::from_dmatrix(c),
        d: vec![d],
    })
}
