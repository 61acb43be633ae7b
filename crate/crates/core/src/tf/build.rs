//! Delay-dependent transfer functions of the compensated loop, with every
//! `e^{-tau s}` replaced by its (5,5) Padé fraction.
//!
//! With `P_tau = N/D` and `P_tau_hat = N̂/D̂`:
//!
//! ```text
//! F        = -k D D̂ / (s D D̂ + k (N D̂ - N̂ D + D D̂))
//! 1 + P F  = (F_den - k N D̂) / F_den
//! -P F     =  k N D̂ / F_den
//! ```
//!
//! The common factor `D` of `P_tau` and `F` is cancelled symbolically. On the
//! identity line `tau == tau_hat` the delay terms cancel exactly and
//! `F = -k / (s + k)`.

use crate::error::{Error, Result};
use crate::linalg::{leverrier_faddeev, Matrix, Polynomial};

use super::pade::{check_delay, pade_polynomials};
use super::rational::{RationalTf, RationalTfVector};

/// Polynomial pieces shared by `F`, `Phi`, `Psi` and `sF`.
#[derive(Clone, Debug)]
pub struct DelayLoop {
    pub k: f64,
    pub tau: f64,
    pub tau_hat: f64,
    /// Numerator of `F`.
    pub f_num: Polynomial,
    /// Denominator of `F`.
    pub f_den: Polynomial,
    /// Numerator of `1 + P_tau F` over `f_den`.
    pub phi_factor: Polynomial,
    /// Numerator of `-P_tau F` over `f_den`.
    pub psi_factor: Polynomial,
}

impl DelayLoop {
    pub fn new(k: f64, tau: f64, tau_hat: f64) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::invalid("k", format!("filter bandwidth must be > 0, got {k}")));
        }
        check_delay("tau", tau)?;
        check_delay("tau_hat", tau_hat)?;
        let (n, d) = pade_polynomials(tau);
        let kk = Polynomial::constant(k);

        if tau == tau_hat {
            let f_den = Polynomial::new(vec![k, 1.0]);
            let phi_factor = &(&d * &f_den) - &n.scale(k);
            let psi_factor = n.scale(k);
            // Common denominator D (s + k); `f()` returns the cancelled form.
            return Ok(DelayLoop {
                k,
                tau,
                tau_hat,
                f_num: d.scale(-k),
                f_den: &d * &f_den,
                phi_factor,
                psi_factor,
            });
        }

        let (nh, dh) = pade_polynomials(tau_hat);
        let dd = &d * &dh;
        let mixed = &(&(&n * &dh) - &(&nh * &d)) + &dd;
        let f_den = &dd.shift(1) + &(&kk * &mixed);
        let f_num = dd.scale(-k);
        let n_dh = &n * &dh;
        let phi_factor = &f_den - &n_dh.scale(k);
        let psi_factor = n_dh.scale(k);
        Ok(DelayLoop {
            k,
            tau,
            tau_hat,
            f_num,
            f_den,
            phi_factor,
            psi_factor,
        })
    }

    pub fn is_identity_line(&self) -> bool {
        self.tau == self.tau_hat
    }

    pub fn f(&self) -> Result<RationalTf> {
        if self.is_identity_line() {
            return Ok(RationalTf::low_pass(self.k).scale(-1.0));
        }
        RationalTf::new(self.f_num.clone(), self.f_den.clone())
    }

    /// `s F(s)`.
    pub fn s_f(&self) -> Result<RationalTf> {
        Ok(self.f()?.times_s())
    }

    /// `1 + e^{-tau s} F(s)`.
    pub fn phi_factor(&self) -> Result<RationalTf> {
        RationalTf::new(self.phi_factor.clone(), self.f_den.clone())
    }

    /// `-e^{-tau s} F(s)`.
    pub fn psi_factor(&self) -> Result<RationalTf> {
        RationalTf::new(self.psi_factor.clone(), self.f_den.clone())
    }
}

pub fn build_f(k: f64, tau: f64, tau_hat: f64) -> Result<RationalTf> {
    DelayLoop::new(k, tau, tau_hat)?.f()
}

/// `(sI - A)^{-1} v` with entries over the common characteristic polynomial.
pub fn resolvent_times(a: &Matrix, v: &[f64]) -> Result<RationalTfVector> {
    if !a.is_square() || a.rows() != v.len() || v.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "resolvent of a {}x{} matrix applied to a length-{} vector",
            a.rows(),
            a.cols(),
            v.len()
        )));
    }
    let r = leverrier_faddeev(a);
    let entries = r
        .adjugate_times(v)
        .into_iter()
        .map(|num| {
            let num = num.trim_relative(crate::linalg::CANCELLATION_TOL);
            RationalTf::new(num, r.char_poly.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    RationalTfVector::new(entries)
}

/// `H(s) = (sI - A_m)^{-1} b`.
pub fn build_h(a_m: &Matrix, b: &[f64]) -> Result<RationalTfVector> {
    a_m.require_hurwitz()?;
    resolvent_times(a_m, b)
}

/// Rows of the transfer matrix `A (sI - A)^{-1}`.
pub fn am_resolvent_rows(a: &Matrix) -> Result<Vec<RationalTfVector>> {
    a.require_hurwitz()?;
    let r = leverrier_faddeev(a);
    r.left_multiplied(a)?
        .into_iter()
        .map(|row| {
            let entries = row
                .into_iter()
                .map(|num| {
                    RationalTf::new(
                        num.trim_relative(crate::linalg::CANCELLATION_TOL),
                        r.char_poly.clone(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            RationalTfVector::new(entries)
        })
        .collect()
}

/// `Phi(s) = H(s) (1 + e^{-tau s} F(s))`.
pub fn build_phi(k: f64, tau: f64, tau_hat: f64, a_m: &Matrix, b: &[f64]) -> Result<RationalTfVector> {
    let h = build_h(a_m, b)?;
    Ok(h.times(&DelayLoop::new(k, tau, tau_hat)?.phi_factor()?))
}

/// `Psi(s) = -H(s) e^{-tau s} F(s) k_d`.
pub fn build_psi(
    k: f64,
    tau: f64,
    tau_hat: f64,
    a_m: &Matrix,
    b: &[f64],
    k_d: f64,
) -> Result<RationalTfVector> {
    let h = build_h(a_m, b)?;
    Ok(h.times(&DelayLoop::new(k, tau, tau_hat)?.psi_factor()?.scale(k_d)))
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::tf::pade_delay;

    fn example_plant() -> (Matrix, Vec<f64>) {
        (
            Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -1.4]]).unwrap(),
            vec![0.0, 1.0],
        )
    }

    #[test]
    fn identity_line_f_is_low_pass() {
        for tau in [0.0, 0.05, 0.3, 1.7] {
            let f = build_f(25.0, tau, tau).unwrap();
            assert_eq!(f.num().coeffs(), &[-25.0]);
            assert_eq!(f.den().coeffs(), &[25.0, 1.0]);
        }
    }

    #[test]
    fn f_has_unit_negative_dc_gain() {
        for (tau, tau_hat) in [(0.07, 0.02), (0.0, 0.3), (0.2, 0.0), (0.11, 0.13)] {
            let f = build_f(25.0, tau, tau_hat).unwrap();
            assert!((f.dc_gain() + 1.0).abs() < 1e-12, "{tau} {tau_hat}: {}", f.dc_gain());
        }
    }

    #[test]
    fn f_degrees_and_stability() {
        let f = build_f(25.0, 0.07, 0.02).unwrap();
        assert_eq!(f.den().degree(), 11);
        assert_eq!(f.num().degree(), 10);
        assert!(f.is_stable().unwrap());
    }

    #[test]
    fn h_for_companion_plant() {
        let (a, b) = example_plant();
        let h = build_h(&a, &b).unwrap();
        assert_eq!(h[0].num().coeffs(), &[1.0]);
        assert_eq!(h[1].num().coeffs(), &[0.0, 1.0]);
        assert_eq!(h[0].den().coeffs(), &[1.0, 1.4, 1.0]);
    }

    #[test]
    fn h_for_diagonal_plant() {
        let h = build_h(&Matrix::scaled_identity(2, -1.0), &[1.0, 0.0]).unwrap();
        assert!((h[0].eval(Complex64::new(0.3, 0.2)) - 1.0 / Complex64::new(1.3, 0.2)).norm() < 1e-15);
        assert!(h[1].is_zero());
    }

    #[test]
    fn h_rejects_unstable_plant() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(build_h(&a, &[1.0, 1.0]), Err(Error::NotHurwitz { .. })));
    }

    #[test]
    fn phi_at_zero_delay_matches_high_pass_form() {
        let (a, b) = example_plant();
        let phi = build_phi(25.0, 0.0, 0.0, &a, &b).unwrap();
        let h = build_h(&a, &b).unwrap();
        for z in [Complex64::new(0.0, 1.0), Complex64::new(-0.3, 4.0), Complex64::new(2.0, 0.0)] {
            for i in 0..2 {
                let expect = h[i].eval(z) * z / (z + 25.0);
                assert!((phi[i].eval(z) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phi_dc_gain_is_exactly_zero() {
        let (a, b) = example_plant();
        for (tau, tau_hat) in [(0.0, 0.0), (0.1, 0.1), (0.07, 0.02), (0.15, 0.2)] {
            let phi = build_phi(25.0, tau, tau_hat, &a, &b).unwrap();
            for e in phi.iter() {
                assert_eq!(e.num().coeff(0), 0.0);
            }
        }
    }

    #[test]
    fn phi_entries_strictly_proper_and_stable() {
        let (a, b) = example_plant();
        let phi = build_phi(25.0, 0.1, 0.1, &a, &b).unwrap();
        for e in phi.iter() {
            assert!(e.is_strictly_proper());
            assert!(e.is_stable().unwrap());
        }
        let phi = build_phi(25.0, 0.07, 0.02, &a, &b).unwrap();
        assert_eq!(phi[0].den().degree(), 13);
    }

    #[test]
    fn psi_cases() {
        let (a, b) = example_plant();
        let zero = build_psi(25.0, 0.07, 0.02, &a, &b, 0.0).unwrap();
        assert!(zero.iter().all(RationalTf::is_zero));

        let psi = build_psi(25.0, 0.1, 0.1, &a, &b, 1.0).unwrap();
        let h = build_h(&a, &b).unwrap();
        let p = pade_delay(0.1).unwrap();
        let z = Complex64::new(0.5, 3.0);
        let expect = h[0].eval(z) * 25.0 * p.eval(z) / (z + 25.0);
        assert!((psi[0].eval(z) - expect).norm() < 1e-12);

        // DC gain from the factor gains: H_1(0) * 1 * k_d = 1.
        let psi = build_psi(25.0, 0.07, 0.02, &a, &b, 1.0).unwrap();
        assert!((psi[0].dc_gain() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn s_f_matches_delay_identity() {
        // sF = -k (1 + (e^{-tau s} - e^{-tau_hat s} + 1) F)
        let (k, tau, tau_hat) = (25.0, 0.07, 0.02);
        let sf = DelayLoop::new(k, tau, tau_hat).unwrap().s_f().unwrap();
        let f = build_f(k, tau, tau_hat).unwrap();
        let (p, ph) = (pade_delay(tau).unwrap(), pade_delay(tau_hat).unwrap());
        for z in [Complex64::new(0.0, 2.0), Complex64::new(1.0, -7.0), Complex64::new(-0.2, 40.0)] {
            let rhs = -k * (1.0 + (p.eval(z) - ph.eval(z) + 1.0) * f.eval(z));
            assert!((sf.eval(z) - rhs).norm() < 1e-9 * rhs.norm().max(1.0));
        }
    }
}
