use nalgebra::{DMatrix, DVector};

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Solves `Aᵀ P + P A = -I` for a Hurwitz `A`.
pub fn solve_lyapunov(a: &Matrix) -> Result<Matrix> {
    solve_lyapunov_with(a, &Matrix::identity(a.rows()))
}

/// Solves `Aᵀ P + P A = -Q` for symmetric `Q`.
///
/// The equation is vectorized over the `n(n+1)/2` entries of the upper
/// triangle of `P` and solved directly; intended for `n` up to a few tens.
pub fn solve_lyapunov_with(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    if !a.is_square() || q.rows() != a.rows() || q.cols() != a.cols() {
        return Err(Error::DimensionMismatch(
            "Lyapunov equation needs square A and Q of equal size".into(),
        ));
    }
    a.require_hurwitz()?;

    let n = a.rows();
    let m = n * (n + 1) / 2;
    let idx = |i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * n - i * (i + 1) / 2 + j
    };

    let mut lhs = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for i in 0..n {
        for j in i..n {
            let row = idx(i, j);
            // (Aᵀ P)_{ij} = sum_k A_{ki} P_{kj};  (P A)_{ij} = sum_k P_{ik} A_{kj}
            for k in 0..n {
                lhs[(row, idx(k, j))] += a[(k, i)];
                lhs[(row, idx(i, k))] += a[(k, j)];
            }
            rhs[row] = -q[(i, j)];
        }
    }

    let sol = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("vectorized Lyapunov system".into()))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("vectorized Lyapunov system".into()));
    }

    let mut p = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            p[(i, j)] = sol[idx(i, j)];
            p[(j, i)] = sol[idx(i, j)];
        }
    }
    Ok(Matrix::from_dmatrix(p))
}

/// `‖Aᵀ P + P A + Q‖_max`.
pub fn lyapunov_residual(a: &Matrix, p: &Matrix, q: &Matrix) -> f64 {
    let r = a.transpose().matmul(p).unwrap().add(&p.matmul(a).unwrap()).unwrap();
    r.add(q).unwrap().max_abs()
}
