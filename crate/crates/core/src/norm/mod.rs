//! L1 norms of stable rational systems and the stability and performance
//! bounds built from them.

mod bounds;
mod l1;
pub mod modal;

pub use bounds::*;
pub use l1::{impulse_response, l1_norm, l1_norm_matrix, l1_norm_vector, NormResult, DEFAULT_TOL};
