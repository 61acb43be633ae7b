//! Minimal dense linear algebra.

mod lyapunov;
mod matrix;
mod poly;
pub mod roots;

pub use lyapunov::{lyapunov_residual, solve_lyapunov, solve_lyapunov_with};
pub use matrix::{leverrier_faddeev, Matrix, Resolvent};
pub use poly::{Polynomial, CANCELLATION_TOL};
pub use roots::{cluster_roots, is_hurwitz, poly_roots, RootCluster, CLUSTER_TOL, HURWITZ_MARGIN};
