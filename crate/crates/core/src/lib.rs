//! Delay-compensated L1 adaptive control toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense matrices, real polynomials, Aberth root finding and
//!   the Lyapunov solver used by the adaptive laws.
//! * [`tf`]: rational transfer functions, the (5,5) Padé approximant of a
//!   pure delay and the delay-dependent loop transfer functions `F`, `H`,
//!   `Phi` and `Psi`.
//! * [`norm`]: certified L1 norms of stable rational systems and the
//!   stability/performance bounds derived from them.
//! * [`sim`]: fixed-step simulation of the plant with input delay, the
//!   adaptive controller with a delayed state predictor, the nonadaptive
//!   reference system and the desired system.
//! * [`continuation`]: pseudo-arclength tracing of the stability boundary in
//!   the (input delay, compensation delay) plane, identity-line margins and
//!   compensation bands.

pub mod continuation;
pub mod error;
pub mod linalg;
pub mod norm;
pub mod sim;
pub mod tf;

pub use error::{Error, Result};
pub use linalg::{Matrix, Polynomial};
pub use norm::{BoundReport, NormResult, TransientConstants};
pub use sim::{ScenarioConfig, SignalSpec, SimTrace};
pub use tf::{RationalTf, RationalTfVector, StateSpace};
pub use continuation::{ContinuationOptions, ContinuationPoint, CurveTrace};
