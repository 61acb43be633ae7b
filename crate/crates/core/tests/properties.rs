use delayctl_core::linalg::{lyapunov_residual, poly_roots, solve_lyapunov, Matrix, Polynomial};
use delayctl_core::sim::projection::indicator;
use delayctl_core::sim::proj;
use delayctl_core::tf::{build_phi, pade_coefficients, pade_delay};
use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

/// Stable by construction: the symmetric part is negative definite.
fn stable_matrix(n: usize, entries: &[f64]) -> Matrix {
    let g = DMatrix::from_row_slice(n, n, &entries[..n * n]);
    let s = DMatrix::from_row_slice(n, n, &entries[n * n..2 * n * n]);
    let a = (&s - s.transpose()) - &g * g.transpose() - DMatrix::identity(n, n) * 0.1;
    Matrix::from_row_slice(n, n, a.as_slice()).map(|m| m.transpose()).unwrap()
}

fn random_stable() -> impl Strategy<Value = Matrix> {
    (1usize..=6).prop_flat_map(|n| prop::collection::vec(-2.0..2.0f64, 2 * n * n).prop_map(move |e| stable_matrix(n, &e)))
}

/// Pade fraction evaluated straight from its coefficients.
fn pade_at(tau: f64, s: Complex64) -> Complex64 {
    let c = pade_coefficients();
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (i, ci) in c.iter().enumerate() {
        let z = (s * tau).powi(i as i32);
        num += z * *ci * if i % 2 == 0 { 1.0 } else { -1.0 };
        den += z * *ci;
    }
    num / den
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lyapunov_solution_is_symmetric_positive_definite(a in random_stable()) {
        let p = solve_lyapunov(&a).unwrap();
        let n = a.rows();
        let scale = 1.0f64.max(a.max_abs() * p.max_abs());
        prop_assert!(lyapunov_residual(&a, &p, &Matrix::identity(n)) <= 1e-10 * scale);
        prop_assert!(p.sub(&p.transpose()).unwrap().max_abs() <= 1e-12 * p.max_abs());
        prop_assert!(p.leading_principal_minors().iter().all(|m| *m > 0.0));
    }

    #[test]
    fn roots_reconstruct_their_polynomial(
        real in prop::collection::vec(0.1..10.0f64, 0..=4),
        pairs in prop::collection::vec((0.1..10.0f64, 0.1..10.0f64), 0..=4),
        signs in prop::collection::vec(any::<bool>(), 4),
    ) {
        let mut roots: Vec<Complex64> = real
            .iter()
            .zip(signs.iter().cycle())
            .map(|(r, s)| Complex64::new(if *s { *r } else { -*r }, 0.0))
            .collect();
        for (re, im) in &pairs {
            roots.push(Complex64::new(-re, *im));
            roots.push(Complex64::new(-re, -im));
        }
        prop_assume!(!roots.is_empty());
        let p = Polynomial::from_roots(&roots);
        let found = poly_roots(&p).unwrap();
        prop_assert_eq!(found.len(), roots.len());
        let back = Polynomial::from_roots(&found).scale(p.leading());
        let err = p
            .coeffs()
            .iter()
            .zip(back.coeffs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        prop_assert!(err <= 1e-8 * p.max_abs_coeff(), "coefficient error {err:e}");
    }

    #[test]
    fn pade_fraction_is_all_pass(tau in 0.0..2.0f64, omega in 0.0..1e3f64) {
        let g = pade_delay(tau).unwrap();
        let v = g.eval(Complex64::new(0.0, omega));
        prop_assert!((v.norm() - 1.0).abs() <= 1e-10);
        // Close to the true delay while the phase lag stays small.
        if omega * tau < 1.0 {
            prop_assert!((v - Complex64::new(0.0, -omega * tau).exp()).norm() <= 1e-8);
        }
    }

    #[test]
    fn phi_matches_its_frequency_response(
        k in 5.0..200.0f64,
        tau in 0.0..0.3f64,
        tau_hat in 0.0..0.3f64,
        omega in 0.01..100.0f64,
    ) {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -1.4]]).unwrap();
        let b = [0.0, 1.0];
        let s = Complex64::new(0.0, omega);
        let phi = build_phi(k, tau, tau_hat, &a, &b).unwrap().eval(s);

        let f = -k / (s + k * (1.0 + pade_at(tau, s) - pade_at(tau_hat, s)));
        let m = DMatrix::from_fn(2, 2, |i, j| {
            let diag = if i == j { s } else { Complex::new(0.0, 0.0) };
            diag - a.as_dmatrix()[(i, j)]
        });
        let h = m.lu().solve(&DVector::from_fn(2, |i, _| Complex::new(b[i], 0.0))).unwrap();
        let factor = 1.0 + pade_at(tau, s) * f;
        for i in 0..2 {
            let want = h[i] * factor;
            prop_assert!((phi[i] - want).norm() <= 1e-8 * (1.0 + want.norm()), "{} vs {}", phi[i], want);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_never_pushes_outward(
        dir in prop::collection::vec(-1.0..1.0f64, 3),
        raw in prop::collection::vec(-10.0..10.0f64, 3),
        bound in 0.5..5.0f64,
        nu in 0.01..1.0f64,
    ) {
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-6);
        let est: Vec<f64> = dir.iter().map(|v| v / norm * bound).collect();
        let mut out = vec![0.0; 3];
        proj(&est, &raw, bound, nu, &mut out);
        // The indicator gradient is parallel to the estimate.
        let dot = |v: &[f64]| v.iter().zip(&est).map(|(a, b)| a * b).sum::<f64>();
        let len = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(dot(&out) <= dot(&raw) + 1e-12);
        prop_assert!(len(&out) <= len(&raw) * (1.0 + 1e-12));
        // On the boundary the outward component is removed entirely.
        prop_assert!(dot(&out) <= 1e-9 * bound * len(&raw));

        // Inside the layer-free region the update passes through untouched.
        let inner: Vec<f64> = est.iter().map(|v| v * 0.5 / (1.0 + nu).sqrt()).collect();
        prop_assert!(indicator(&inner, bound, nu) < 0.0);
        proj(&inner, &raw, bound, nu, &mut out);
        prop_assert_eq!(&out, &raw);
    }
}
