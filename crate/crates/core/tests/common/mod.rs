#![allow(dead_code)]

use std::io::Write;

use delayctl_core::RationalTf;
use nalgebra::DMatrix;

/// Brute-force L1 norm: RK4 on an observable canonical realization from the
/// impulse initial state, trapezoid rule on `|h|` with a fixed step over the
/// horizon `50 / alpha`, where `alpha` is the slowest pole's decay rate.
///
/// The frequency variable is rescaled to the geometric mean pole modulus
/// before building the realization, which leaves the L1 norm unchanged and
/// keeps the companion coefficients well scaled.
pub fn brute_force_l1(tf: &RationalTf, step: f64) -> f64 {
    let den = tf.den().coeffs().to_vec();
    let mut num = tf.num().coeffs().to_vec();
    let n = den.len() - 1;
    num.resize(n + 1, 0.0);
    let d = num[n] / den[n];
    let lead = den[n];
    let w = (den[0] / lead).abs().powf(1.0 / n as f64);

    // Monic scaled denominator a_i and strictly proper numerator b_i.
    let a: Vec<f64> = (0..n).map(|i| den[i] / lead * w.powi(i as i32 - n as i32)).collect();
    let b: Vec<f64> = (0..n)
        .map(|i| (num[i] - d * den[i]) / lead * w.powi(i as i32 - n as i32))
        .collect();

    let mut m = DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        m[(r, 0)] = -a[n - 1 - r];
        if r + 1 < n {
            m[(r, r + 1)] = 1.0;
        }
    }
    // Decay rate in the original time units.
    let alpha = w * nalgebra::Schur::try_new(m.clone(), 1e-14, 10_000)
        .expect("Schur iteration converges")
        .complex_eigenvalues()
        .iter()
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    assert!(alpha > 0.0, "oracle needs a stable system");

    let dt = step * w;
    let steps = (50.0 / alpha / step).ceil() as usize;
    let deriv = |x: &[f64], out: &mut [f64]| {
        for r in 0..n {
            out[r] = -a[n - 1 - r] * x[0] + if r + 1 < n { x[r + 1] } else { 0.0 };
        }
    };
    let mut x: Vec<f64> = (0..n).map(|r| b[n - 1 - r]).collect();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut integral = 0.0;
    let mut prev = x[0].abs();
    for _ in 0..steps {
        deriv(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        deriv(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        deriv(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        deriv(&tmp, &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let cur = x[0].abs();
        integral += 0.5 * dt * (prev + cur);
        prev = cur;
    }
    d.abs() + integral
}

/// One result line per check, written past the test harness's capture so it
/// shows up in the plain `cargo test` log.
pub fn report(label: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{verdict}] {label}: {detail}");
    let _ = out.flush();
}
