use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::signal::{SignalSpec, TrigKind};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::norm::{default_d_sigma_bar, default_rho_u, BoundReport, ReferenceBoundsInput, TransientInput};

/// Full description of one closed-loop experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "A_m")]
    pub a_m: Matrix,
    pub b: Vec<f64>,
    /// Output vector; `y = cᵀx`.
    pub c: Vec<f64>,
    #[serde(rename = "A_sp")]
    pub a_sp: Matrix,
    /// One signal per state component.
    pub theta_signal: Vec<SignalSpec>,
    pub sigma_signal: SignalSpec,
    pub yd_signal: SignalSpec,
    pub tau: f64,
    pub tau_hat: f64,
    pub k: f64,
    pub k_d: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    pub theta_b: f64,
    pub sigma_bar_b: f64,
    pub nu: f64,
    pub x0: Vec<f64>,
    pub x_des0: Vec<f64>,
    pub theta_hat0: Vec<f64>,
    pub sigma_hat0: f64,
    pub t_final: f64,
    /// Integration step; defaults by adaptation gain (see [`Self::step`]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_step: Option<f64>,
    /// Steps between stored samples; defaults to about one sample per ms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    /// Also integrate the nonadaptive reference system.
    #[serde(default)]
    pub include_reference: bool,
}

impl ScenarioConfig {
    /// The two-state example plant with the uncertainties, gains and initial
    /// conditions used throughout the examples, at the given delays.
    pub fn example(tau: f64, tau_hat: f64) -> Self {
        ScenarioConfig {
            a_m: Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -1.4]]).expect("static matrix"),
            b: vec![0.0, 1.0],
            c: vec![1.0, 0.0],
            a_sp: Matrix::scaled_identity(2, -100.0),
            theta_signal: vec![
                SignalSpec::constant(0.5).with(TrigKind::Cosine, 1.0, PI),
                SignalSpec::constant(1.0)
                    .with(TrigKind::Sine, 0.3, PI)
                    .with(TrigKind::Cosine, 0.2, 2.0),
            ],
            sigma_signal: SignalSpec::sine(1.0, 0.5 * PI),
            yd_signal: SignalSpec::cosine(1.0, 2.0 / PI),
            tau,
            tau_hat,
            k: 25.0,
            k_d: 1.0,
            gamma: 1e7,
            theta_b: 2.0,
            sigma_bar_b: 100.0,
            nu: 0.1,
            x0: vec![0.0, 1.0],
            x_des0: vec![1.0, 0.0],
            theta_hat0: vec![0.0, 0.0],
            sigma_hat0: 0.0,
            t_final: 10.0,
            h_step: None,
            sample_stride: None,
            include_reference: false,
        }
    }

    pub fn order(&self) -> usize {
        self.b.len()
    }

    /// Integration step: `h_step` if given, else `1e-5` for `Gamma <= 1e6`
    /// and `2e-6` above.
    pub fn step(&self) -> f64 {
        self.h_step.unwrap_or(if self.gamma <= 1e6 { 1e-5 } else { 2e-6 })
    }

    pub fn stride(&self) -> usize {
        self.sample_stride
            .unwrap_or_else(|| ((1e-3 / self.step()).round() as usize).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        if n == 0 {
            return Err(Error::config("b", "plant order must be at least 1"));
        }
        let square = |name: &str, m: &Matrix| -> Result<()> {
            if m.rows() != n || m.cols() != n {
                return Err(Error::config(name, format!("expected {n}x{n}, got {}x{}", m.rows(), m.cols())));
            }
            Ok(())
        };
        square("A_m", &self.a_m)?;
        square("A_sp", &self.a_sp)?;
        for (name, v) in [
            ("c", &self.c),
            ("x0", &self.x0),
            ("x_des0", &self.x_des0),
            ("theta_hat0", &self.theta_hat0),
        ] {
            if v.len() != n {
                return Err(Error::config(name, format!("expected length {n}, got {}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::config(name, "entries must be finite"));
            }
        }
        if self.b.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("b", "entries must be finite"));
        }
        if self.theta_signal.len() != n {
            return Err(Error::config(
                "theta_signal",
                format!("expected {n} component signals, got {}", self.theta_signal.len()),
            ));
        }
        for (name, s) in self
            .theta_signal
            .iter()
            .map(|s| ("theta_signal", s))
            .chain([("sigma_signal", &self.sigma_signal), ("yd_signal", &self.yd_signal)])
        {
            if !s.is_finite() {
                return Err(Error::config(name, "signal parameters must be finite"));
            }
        }
        let nonneg = |name: &str, v: f64| -> Result<()> {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(name, format!("must be finite and >= 0, got {v}")));
            }
            Ok(())
        };
        let positive = |name: &str, v: f64| -> Result<()> {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::config(name, format!("must be finite and > 0, got {v}")));
            }
            Ok(())
        };
        nonneg("tau", self.tau)?;
        nonneg("tau_hat", self.tau_hat)?;
        positive("k", self.k)?;
        positive("Gamma", self.gamma)?;
        positive("theta_b", self.theta_b)?;
        positive("sigma_bar_b", self.sigma_bar_b)?;
        positive("nu", self.nu)?;
        positive("t_final", self.t_final)?;
        positive("h_step", self.step())?;
        if !self.k_d.is_finite() {
            return Err(Error::config("k_d", "must be finite"));
        }
        if !self.sigma_hat0.is_finite() {
            return Err(Error::config("sigma_hat0", "must be finite"));
        }
        if self.sample_stride == Some(0) {
            return Err(Error::config("sample_stride", "must be >= 1"));
        }
        let theta_norm = self.theta_hat0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if theta_norm > self.theta_b {
            return Err(Error::config("theta_hat0", format!("norm {theta_norm} exceeds theta_b = {}", self.theta_b)));
        }
        if self.sigma_hat0.abs() > self.sigma_bar_b {
            return Err(Error::config("sigma_hat0", "magnitude exceeds sigma_bar_b"));
        }
        if self.step() > self.t_final {
            return Err(Error::config("h_step", "step exceeds t_final"));
        }
        Ok(())
    }

    /// Inputs of the reference-system bounds, with `sigma_b` and `yd_sup`
    /// taken from the signal sup bounds.
    pub fn reference_bounds_input(&self, tol: f64) -> ReferenceBoundsInput {
        ReferenceBoundsInput {
            k: self.k,
            tau: self.tau,
            tau_hat: self.tau_hat,
            a_m: self.a_m.clone(),
            b: self.b.clone(),
            k_d: self.k_d,
            theta_b: self.theta_b,
            sigma_b: self.sigma_signal.sup_bound(),
            yd_sup: self.yd_signal.sup_bound(),
            x0: self.x0.clone(),
            tol,
        }
    }

    /// Inputs of the transient constants with default `rho_u`, `d_theta` and
    /// `d_sigma`. `None` when the report carries no `rho_ref`.
    pub fn transient_input(&self, report: &BoundReport, tol: f64) -> Option<TransientInput> {
        let rho_ref = report.rho_ref?;
        let sigma_b = self.sigma_signal.sup_bound();
        let yd_sup = self.yd_signal.sup_bound();
        let rho_u = default_rho_u(report.g, self.theta_b, rho_ref, sigma_b, self.k_d, yd_sup);
        let d_theta = self.theta_signal.iter().map(SignalSpec::derivative_bound).sum();
        let d_sigma = default_d_sigma_bar(
            self.sigma_signal.derivative_bound(),
            self.k,
            self.tau,
            self.tau_hat,
            rho_u,
            self.theta_b,
            rho_ref,
            self.sigma_bar_b,
            self.k_d,
            yd_sup,
        );
        Some(TransientInput {
            k: self.k,
            tau: self.tau,
            tau_hat: self.tau_hat,
            a_m: self.a_m.clone(),
            b: self.b.clone(),
            a_sp: self.a_sp.clone(),
            theta_b: self.theta_b,
            sigma_b,
            rho_u,
            d_theta,
            d_sigma,
            gamma: self.gamma,
            tol,
        })
    }
}
