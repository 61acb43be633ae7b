mod common;

use common::brute_force_l1;
use delayctl_core::linalg::Matrix;
use delayctl_core::norm::{compute_f, compute_g, l1_norm, l1_norm_vector, DEFAULT_TOL};
use delayctl_core::tf::{build_f, build_phi};
use delayctl_core::{Error, RationalTf};

#[test]
fn feedthrough_and_zeros_match_quadrature() {
    let cases = [
        // (s - 2)/(s^2 + 3s + 2): sign-changing impulse response.
        RationalTf::from_coeffs(&[-2.0, 1.0], &[2.0, 3.0, 1.0]).unwrap(),
        // (2s + 1)/(s + 4): feedthrough 2.
        RationalTf::from_coeffs(&[1.0, 2.0], &[4.0, 1.0]).unwrap(),
        build_f(50.0, 0.02, 0.1).unwrap(),
    ];
    for tf in &cases {
        let got = l1_norm(tf, DEFAULT_TOL).unwrap();
        let oracle = brute_force_l1(tf, 1e-5);
        assert!((got.value - oracle).abs() <= 1e-4, "{got:?} vs {oracle}");
        assert!(got.tail_bound <= DEFAULT_TOL / 2.0);
    }
}

#[test]
fn vector_norm_is_the_largest_entry() {
    let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -1.4]]).unwrap();
    let phi = build_phi(25.0, 0.1, 0.05, &a, &[0.0, 1.0]).unwrap();
    let whole = l1_norm_vector(&phi, DEFAULT_TOL).unwrap().value;
    let largest = phi
        .iter()
        .map(|e| l1_norm(e, DEFAULT_TOL).unwrap().value)
        .fold(0.0, f64::max);
    assert_eq!(whole, largest);
    assert_eq!(whole, compute_f(25.0, 0.1, 0.05, &a, &[0.0, 1.0], DEFAULT_TOL).unwrap());
}

#[test]
fn g_is_one_on_the_identity_line_and_grows_off_it() {
    for tau in [0.0, 0.1, 0.4] {
        assert!((compute_g(25.0, tau, tau, DEFAULT_TOL).unwrap() - 1.0).abs() <= 1e-5);
    }
    assert!(compute_g(25.0, 0.05, 0.0, DEFAULT_TOL).unwrap() > 1.0);
}

#[test]
fn unstable_system_is_rejected() {
    let tf = RationalTf::from_coeffs(&[1.0], &[-1.0, 1.0]).unwrap();
    assert!(matches!(l1_norm(&tf, DEFAULT_TOL), Err(Error::NotHurwitz { .. })));
    let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -1.4]]).unwrap();
    assert!(matches!(
        compute_f(25.0, 0.06, 0.14, &a, &[0.0, 1.0], DEFAULT_TOL),
        Err(Error::StabilityLost { .. })
    ));
}
