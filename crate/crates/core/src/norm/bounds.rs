use serde::{Deserialize, Serialize};

use super::l1::{l1_norm, l1_norm_matrix, l1_norm_vector, NormResult};
use crate::error::{Error, Result};
use crate::linalg::{solve_lyapunov, Matrix};
use crate::tf::{am_resolvent_rows, build_h, build_phi, build_psi, resolvent_times, DelayLoop};

fn stability_lost(tau: f64, tau_hat: f64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NotHurwitz { .. } => Error::StabilityLost { tau, tau_hat },
        other => other,
    }
}

fn check_plant(a_m: &Matrix, b: &[f64]) -> Result<()> {
    if !a_m.is_square() || a_m.rows() != b.len() || b.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "A_m is {}x{} but b has length {}",
            a_m.rows(),
            a_m.cols(),
            b.len()
        )));
    }
    Ok(())
}

/// `f(tau, tau_hat) = ‖Phi‖_{L1}` with the norm details.
pub fn compute_f_result(k: f64, tau: f64, tau_hat: f64, a_m: &Matrix, b: &[f64], tol: f64) -> Result<NormResult> {
    check_plant(a_m, b)?;
    a_m.require_hurwitz()?;
    let phi = build_phi(k, tau, tau_hat, a_m, b)?;
    l1_norm_vector(&phi, tol).map_err(stability_lost(tau, tau_hat))
}

/// `f(tau, tau_hat) = ‖Phi(s; tau, tau_hat)‖_{L1}`.
///
/// Returns [`Error::StabilityLost`] when a Padé-substituted denominator is
/// not Hurwitz, i.e. `(tau, tau_hat)` lies outside the stable region.
pub fn compute_f(k: f64, tau: f64, tau_hat: f64, a_m: &Matrix, b: &[f64], tol: f64) -> Result<f64> {
    Ok(compute_f_result(k, tau, tau_hat, a_m, b, tol)?.value)
}

/// `f̄(tau) = f(tau, tau)`.
pub fn compute_fbar(k: f64, tau: f64, a_m: &Matrix, b: &[f64], tol: f64) -> Result<f64> {
    compute_f(k, tau, tau, a_m, b, tol)
}

/// `g(tau, tau_hat) = ‖F(s; tau, tau_hat)‖_{L1}`.
pub fn compute_g(k: f64, tau: f64, tau_hat: f64, tol: f64) -> Result<f64> {
    let f = DelayLoop::new(k, tau, tau_hat)?.f()?;
    Ok(l1_norm(&f, tol).map_err(stability_lost(tau, tau_hat))?.value)
}

/// `(1 + ‖A_m (sI - A_m)^{-1}‖_{L1}) ‖b‖_2 / k`, an upper bound on `f̄(0)`.
pub fn fbar0_upper_bound(a_m: &Matrix, b: &[f64], k: f64, tol: f64) -> Result<f64> {
    check_plant(a_m, b)?;
    if k <= 0.0 || !k.is_finite() {
        return Err(Error::invalid("k", format!("filter bandwidth must be > 0, got {k}")));
    }
    let rows = am_resolvent_rows(a_m)?;
    let n = l1_norm_matrix(&rows, tol)?.value;
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((1.0 + n) * b_norm / k)
}

/// Inputs of the reference-system bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceBoundsInput {
    pub k: f64,
    pub tau: f64,
    pub tau_hat: f64,
    pub a_m: Matrix,
    pub b: Vec<f64>,
    pub k_d: f64,
    pub theta_b: f64,
    pub sigma_b: f64,
    /// `‖y_d‖_{L∞}`.
    pub yd_sup: f64,
    pub x0: Vec<f64>,
    pub tol: f64,
}

/// Stability condition and reference-system bounds at one `(tau, tau_hat)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub f: f64,
    pub g: f64,
    pub rho_d: f64,
    pub rho_ic: f64,
    /// `None` when `f theta_b >= 1`.
    pub rho_ref: Option<f64>,
    pub diverged: bool,
    /// `1 - f theta_b`.
    pub stability_margin: f64,
}

pub fn reference_bounds(input: &ReferenceBoundsInput) -> Result<BoundReport> {
    let ReferenceBoundsInput {
        k,
        tau,
        tau_hat,
        ref a_m,
        ref b,
        k_d,
        theta_b,
        sigma_b,
        yd_sup,
        ref x0,
        tol,
    } = *input;
    check_plant(a_m, b)?;
    if x0.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "x0 has length {} but the plant has order {}",
            x0.len(),
            b.len()
        )));
    }
    for (name, v) in [("theta_b", theta_b), ("sigma_b", sigma_b), ("yd_sup", yd_sup), ("k_d", k_d)] {
        if !v.is_finite() {
            return Err(Error::invalid("bounds", format!("{name} must be finite")));
        }
    }
    if yd_sup < 0.0 {
        return Err(Error::invalid("yd_sup", "sup-norm bound must be >= 0"));
    }

    let f = compute_f(k, tau, tau_hat, a_m, b, tol)?;
    let g = compute_g(k, tau, tau_hat, tol)?;
    let rho_d = if k_d == 0.0 || yd_sup == 0.0 {
        0.0
    } else {
        let psi = build_psi(k, tau, tau_hat, a_m, b, k_d)?;
        l1_norm_vector(&psi, tol).map_err(stability_lost(tau, tau_hat))?.value * yd_sup
    };
    let rho_ic = if x0.iter().all(|v| *v == 0.0) {
        0.0
    } else {
        l1_norm_vector(&resolvent_times(a_m, x0)?, tol)?.value
    };
    let stability_margin = 1.0 - f * theta_b;
    let rho_ref = (stability_margin > 0.0).then(|| (f * sigma_b + rho_d + rho_ic) / stability_margin);
    Ok(BoundReport {
        f,
        g,
        rho_d,
        rho_ic,
        rho_ref,
        diverged: rho_ref.is_none(),
        stability_margin,
    })
}

/// Inputs of the transient (adaptive-versus-reference) constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransientInput {
    pub k: f64,
    pub tau: f64,
    pub tau_hat: f64,
    pub a_m: Matrix,
    pub b: Vec<f64>,
    pub a_sp: Matrix,
    pub theta_b: f64,
    pub sigma_b: f64,
    /// Assumed bound on the adaptive control signal.
    pub rho_u: f64,
    /// Bound on `‖θ'(t)‖`.
    pub d_theta: f64,
    /// Bound on the derivative of the lumped uncertainty `σ̄`.
    pub d_sigma: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransientConstants {
    pub sigma_bar_b: f64,
    pub nu_m: f64,
    /// `sqrt(nu_m / (lambda_min(P) Gamma))`, the bound on `‖x̃‖_{L∞}`.
    pub est_error_bound: f64,
    pub b0: f64,
    pub b2: f64,
    pub b_r: f64,
    pub b_u: f64,
}

pub fn transient_constants(input: &TransientInput) -> Result<TransientConstants> {
    let TransientInput {
        k,
        tau,
        tau_hat,
        ref a_m,
        ref b,
        ref a_sp,
        theta_b,
        sigma_b,
        rho_u,
        d_theta,
        d_sigma,
        gamma,
        tol,
    } = *input;
    check_plant(a_m, b)?;
    if a_sp.rows() != b.len() || !a_sp.is_square() {
        return Err(Error::DimensionMismatch("A_sp must match the plant order".into()));
    }
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::invalid("Gamma", format!("adaptation gain must be > 0, got {gamma}")));
    }
    for (name, v) in [
        ("theta_b", theta_b),
        ("sigma_b", sigma_b),
        ("rho_u", rho_u),
        ("d_theta", d_theta),
        ("d_sigma", d_sigma),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid("transient", format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let btb: f64 = b.iter().map(|v| v * v).sum();
    if btb == 0.0 {
        return Err(Error::DegenerateInput("b^T b = 0".into()));
    }

    let p = solve_lyapunov(a_sp)?;
    let eig = p.symmetric_eigenvalues();
    let (lmin, lmax) = (eig[0], eig[eig.len() - 1]);

    let sigma_bar_b = sigma_b + 2.0 * rho_u;
    let nu_m = 4.0 * (theta_b * theta_b + sigma_bar_b * sigma_bar_b) + 4.0 * lmax * (theta_b * d_theta + sigma_bar_b * d_sigma);
    let est_error_bound = (nu_m / (lmin * gamma)).sqrt();

    let f = compute_f(k, tau, tau_hat, a_m, b, tol)?;
    let margin = 1.0 - f * theta_b;
    if margin <= 0.0 {
        return Err(Error::ConditionViolated {
            tau,
            tau_hat,
            value: f * theta_b,
        });
    }
    let lp = DelayLoop::new(k, tau, tau_hat)?;
    let f_tf = lp.f()?;
    let g = l1_norm(&f_tf, tol).map_err(stability_lost(tau, tau_hat))?.value;
    let sf = l1_norm(&lp.s_f()?, tol).map_err(stability_lost(tau, tau_hat))?.value;

    // b* = (bᵀb)⁻¹ bᵀ acts on x̃ as a row; its entries scale each channel.
    let b_star: Vec<f64> = b.iter().map(|v| v / btb).collect();
    let b_star_asp: Vec<f64> = (0..b.len())
        .map(|j| (0..b.len()).map(|i| b_star[i] * a_sp[(i, j)]).sum())
        .collect();
    let l1_row = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    let b0 = sf * l1_row(&b_star) + g * l1_row(&b_star_asp);

    let h_norm = l1_norm_vector(&build_h(a_m, b)?, tol)?.value;
    let b2 = b0 * h_norm;
    let b_r = b2 / margin;
    let b_u = g * b2 * theta_b / margin + b0;
    Ok(TransientConstants {
        sigma_bar_b,
        nu_m,
        est_error_bound,
        b0,
        b2,
        b_r,
        b_u,
    })
}

/// Default assumed control bound `2 g (theta_b rho_ref + sigma_b + k_d yd_sup)`.
pub fn default_rho_u(g: f64, theta_b: f64, rho_ref: f64, sigma_b: f64, k_d: f64, yd_sup: f64) -> f64 {
    2.0 * g * (theta_b * rho_ref + sigma_b + k_d.abs() * yd_sup)
}

/// Default bound on the derivative of `σ̄ = σ + u(t - tau) - u(t - tau_hat)`.
///
/// The delayed-control terms cancel on the identity line; elsewhere each is
/// bounded through the filter equation `u' = -k (u + θ̂ᵀx + σ̂ + k_d y_d)`
/// with `‖x‖ <= rho_ref + 1`.
#[allow(clippy::too_many_arguments)]
pub fn default_d_sigma_bar(
    d_sigma: f64,
    k: f64,
    tau: f64,
    tau_hat: f64,
    rho_u: f64,
    theta_b: f64,
    rho_ref: f64,
    sigma_hat_bound: f64,
    k_d: f64,
    yd_sup: f64,
) -> f64 {
    if tau == tau_hat {
        return d_sigma;
    }
    let u_dot = k * (rho_u + theta_b * (rho_ref + 1.0) + sigma_hat_bound + k_d.abs() * yd_sup);
    d_sigma + 2.0 * u_dot
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::DEFAULT_TOL;

    fn plant() -> (Matrix, Vec<f64>) {
        (
            Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -1.4]]).unwrap(),
            vec![0.0, 1.0],
        )
    }

    #[test]
    fn g_is_one_on_identity_line() {
        for tau in [0.0, 0.1, 0.3] {
            assert!((compute_g(25.0, tau, tau, DEFAULT_TOL).unwrap() - 1.0).abs() < DEFAULT_TOL);
        }
    }

    #[test]
    fn g_at_least_one() {
        assert!(compute_g(25.0, 0.07, 0.02, DEFAULT_TOL).unwrap() >= 1.0 - DEFAULT_TOL);
    }

    #[test]
    fn fbar_increases_along_identity_line() {
        let (a, b) = plant();
        let v: Vec<f64> = [0.0, 0.1, 0.2]
            .iter()
            .map(|&t| compute_fbar(25.0, t, &a, &b, DEFAULT_TOL).unwrap())
            .collect();
        assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
    }

    #[test]
    fn fbar0_bound_for_negative_identity() {
        let a = Matrix::scaled_identity(2, -1.0);
        let b = [3.0, 4.0];
        let bound = fbar0_upper_bound(&a, &b, 10.0, DEFAULT_TOL).unwrap();
        assert!((bound - 2.0 * 5.0 / 10.0).abs() < 1e-4);
        let half = fbar0_upper_bound(&a, &b, 20.0, DEFAULT_TOL).unwrap();
        assert_eq!(half, bound / 2.0);
    }

    #[test]
    fn far_outside_region_is_stability_lost() {
        let (a, b) = plant();
        assert!(matches!(
            compute_f(25.0, 1.0, 0.0, &a, &b, DEFAULT_TOL),
            Err(Error::StabilityLost { .. })
        ));
    }

    #[test]
    fn homogeneous_reference_bounds() {
        let (a, b) = plant();
        let input = ReferenceBoundsInput {
            k: 25.0,
            tau: 0.06,
            tau_hat: 0.06,
            a_m: a,
            b,
            k_d: 1.0,
            theta_b: 2.0,
            sigma_b: 1.0,
            yd_sup: 0.0,
            x0: vec![0.0, 0.0],
            tol: DEFAULT_TOL,
        };
        let r = reference_bounds(&input).unwrap();
        assert_eq!(r.rho_d, 0.0);
        assert_eq!(r.rho_ic, 0.0);
        let expect = r.f / (1.0 - 2.0 * r.f);
        assert!((r.rho_ref.unwrap() - expect).abs() < 1e-12);

        let violated = ReferenceBoundsInput {
            theta_b: 2.0 / r.f,
            ..input
        };
        let r = reference_bounds(&violated).unwrap();
        assert!(r.diverged && r.rho_ref.is_none() && r.stability_margin <= 0.0);
    }

    fn transient_input(gamma: f64) -> TransientInput {
        let (a, b) = plant();
        TransientInput {
            k: 25.0,
            tau: 0.06,
            tau_hat: 0.06,
            a_m: a,
            b,
            a_sp: Matrix::scaled_identity(2, -100.0),
            theta_b: 2.0,
            sigma_b: 0.0,
            rho_u: 0.0,
            d_theta: 0.0,
            d_sigma: 0.0,
            gamma,
            tol: DEFAULT_TOL,
        }
    }

    #[test]
    fn transient_collapse_and_scaling() {
        let c1 = transient_constants(&transient_input(1e6)).unwrap();
        assert_eq!(c1.nu_m, 16.0);
        let c4 = transient_constants(&transient_input(4e6)).unwrap();
        assert!((c4.est_error_bound - c1.est_error_bound / 2.0).abs() <= 1e-15 * c1.est_error_bound);
        // On the identity line ‖sF‖ = 2k and ‖F‖ = 1; b* = [0, 1], b* A_sp = [0, -100].
        assert!((c1.b0 - (2.0 * 25.0 + 100.0)).abs() < 1e-3, "{}", c1.b0);
        assert!(c1.b_r > c1.b2 && c1.b_u > c1.b0);
    }

    #[test]
    fn degenerate_b() {
        let mut input = transient_input(1e6);
        input.a_m = Matrix::scaled_identity(2, -1.0);
        input.b = vec![0.0, 0.0];
        assert!(transient_constants(&input).is_err());
    }
}
