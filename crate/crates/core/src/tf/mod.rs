//! Rational transfer functions and the delay-dependent loop transfer
//! functions of the compensated controller.

mod build;
mod pade;
mod rational;
mod statespace;

pub use build::{am_resolvent_rows, build_f, build_h, build_phi, build_psi, resolvent_times, DelayLoop};
pub use pade::{pade_coefficients, pade_coefficients_exact, pade_delay, pade_polynomials, PADE_ORDER};
pub use rational::{RationalTf, RationalTfVector};
pub use statespace::{tf_to_statespace, StateSpace};
