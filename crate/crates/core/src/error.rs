use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix or polynomial is not Hurwitz (an eigenvalue/root has real part {max_real_part:e})")]
    NotHurwitz { max_real_part: f64 },

    #[error("linear system is numerically singular: {0}")]
    SingularSystem(String),

    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        best: Vec<Complex64>,
    },

    #[error("transfer function is improper (numerator degree {num} > denominator degree {den})")]
    ImproperTf { num: usize, den: usize },

    #[error("L1 tail bound cannot be certified before t = {limit:e}")]
    TailBoundFailure { limit: f64 },

    #[error("stability lost at (tau, tau_hat) = ({tau}, {tau_hat}): a Pade-substituted denominator is not Hurwitz")]
    StabilityLost { tau: f64, tau_hat: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("invalid argument `{arg}`: {reason}")]
    InvalidArgument { arg: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no samples in the metric window starting at t = {t_start}")]
    EmptyWindow { t_start: f64 },

    #[error("continuation start point did not converge onto the level set (last residual {residual:e})")]
    StartNotConverged { residual: f64 },

    #[error("stability condition already violated at tau = tau_hat = 0 (f * theta_b = {value})")]
    ConditionViolatedAtZero { value: f64 },

    #[error("no crossing of the stability condition found on the identity line up to tau = {tau_max}")]
    NoRootInRange { tau_max: f64 },

    #[error("stability condition violated on the identity line at tau = {tau} (f * theta_b = {value})")]
    ConditionViolatedOnIdentity { tau: f64, value: f64 },

    #[error("stability condition violated at (tau, tau_hat) = ({tau}, {tau_hat}) (f * theta_b = {value})")]
    ConditionViolated { tau: f64, tau_hat: f64, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(arg: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            arg,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
