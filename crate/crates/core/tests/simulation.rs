use delayctl_core::norm::{reference_bounds, transient_constants, DEFAULT_TOL};
use delayctl_core::sim::{simulate_closed_loop, simulate_desired, simulate_reference, ScenarioConfig, SignalSpec};
use nalgebra::{Complex, DMatrix, DVector};

fn quiet(tau: f64, tau_hat: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::example(tau, tau_hat);
    cfg.theta_signal = vec![SignalSpec::zero(); 2];
    cfg.sigma_signal = SignalSpec::zero();
    cfg.yd_signal = SignalSpec::zero();
    cfg
}

#[test]
fn equilibrium_stays_at_zero() {
    let mut cfg = quiet(0.05, 0.02);
    cfg.x0 = vec![0.0; 2];
    cfg.x_des0 = vec![0.0; 2];
    cfg.gamma = 1e5;
    cfg.t_final = 1.0;
    cfg.include_reference = true;
    let tr = simulate_closed_loop(&cfg).unwrap();
    assert!(tr.x.iter().flatten().all(|v| *v == 0.0));
    assert!(tr.u.iter().all(|v| *v == 0.0));
    assert!(tr.u_ref.unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn reference_control_is_an_ode_on_the_identity_line() {
    let mut cfg = ScenarioConfig::example(0.1, 0.1);
    cfg.t_final = 2.0;
    cfg.h_step = Some(1e-5);
    cfg.sample_stride = Some(10);
    let r = simulate_reference(&cfg).unwrap();
    let dt = r.t[1] - r.t[0];
    let mut worst = 0.0f64;
    for i in 1..r.t.len() - 1 {
        let t = r.t[i];
        let eta: f64 = cfg
            .theta_signal
            .iter()
            .zip(&r.x_ref[i])
            .map(|(s, x)| s.eval(t) * x)
            .sum::<f64>()
            + cfg.sigma_signal.eval(t);
        let rhs = -cfg.k * (r.u_ref[i] + eta - cfg.k_d * cfg.yd_signal.eval(t));
        let fd = (r.u_ref[i + 1] - r.u_ref[i - 1]) / (2.0 * dt);
        worst = worst.max((fd - rhs).abs() / (1.0 + rhs.abs()));
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn reference_state_respects_rho_ref() {
    let mut cfg = ScenarioConfig::example(0.1, 0.1);
    cfg.t_final = 10.0;
    let rep = reference_bounds(&cfg.reference_bounds_input(DEFAULT_TOL)).unwrap();
    assert!(rep.stability_margin > 0.0);
    let r = simulate_reference(&cfg).unwrap();
    assert!(r.sup_x() <= rep.rho_ref.unwrap(), "{} > {:?}", r.sup_x(), rep.rho_ref);
}

#[test]
fn desired_free_response_decays() {
    let mut cfg = quiet(0.0, 0.0);
    cfg.x_des0 = vec![1.0, 0.0];
    let d = simulate_desired(&cfg).unwrap();
    let last = d.x_des.last().unwrap();
    assert!(last.iter().all(|v| v.abs() < 0.05), "{last:?}");
    // Envelope of the -0.7 ± 0.714i pair.
    for (t, x) in d.t.iter().zip(&d.x_des) {
        assert!(x[0].abs() <= 1.5 * (-0.7 * t).exp() + 1e-9);
    }
}

#[test]
fn desired_steady_state_amplitude_matches_frequency_response() {
    let mut cfg = ScenarioConfig::example(0.0, 0.0);
    cfg.t_final = 60.0;
    let omega = 2.0 / std::f64::consts::PI;
    let d = simulate_desired(&cfg).unwrap();
    let amplitude = d
        .t
        .iter()
        .zip(&d.y_des)
        .filter(|(t, _)| **t >= 40.0)
        .map(|(_, y)| y.abs())
        .fold(0.0, f64::max);

    let a = cfg.a_m.as_dmatrix();
    let m = DMatrix::from_fn(2, 2, |i, j| {
        let diag = if i == j { Complex::new(0.0, omega) } else { Complex::new(0.0, 0.0) };
        diag - a[(i, j)]
    });
    let h = m.lu().solve(&DVector::from_fn(2, |i, _| Complex::new(cfg.b[i], 0.0))).unwrap();
    let gain = (h[0] * cfg.c[0] + h[1] * cfg.c[1]).norm();
    assert!((amplitude - gain).abs() < 1e-3, "{amplitude} vs {gain}");
}

#[test]
fn transient_bounds_hold_on_identity_line() {
    let mut cfg = ScenarioConfig::example(0.06, 0.06);
    cfg.gamma = 1e5;
    cfg.include_reference = true;
    let rep = reference_bounds(&cfg.reference_bounds_input(DEFAULT_TOL)).unwrap();
    let tc = transient_constants(&cfg.transient_input(&rep, DEFAULT_TOL).unwrap()).unwrap();
    let tr = simulate_closed_loop(&cfg).unwrap();
    assert!(!tr.diverged);
    assert!(tr.sup_x_tilde() <= tc.est_error_bound, "{} > {}", tr.sup_x_tilde(), tc.est_error_bound);
    let dev = tr.sup_ref_deviation().unwrap();
    let bound = tc.b_r * tc.est_error_bound;
    assert!(dev <= bound, "{dev} > {bound}");
}

#[test]
fn csv_round_trip_preserves_samples() {
    let mut cfg = ScenarioConfig::example(0.06, 0.0);
    cfg.gamma = 1e5;
    cfg.t_final = 0.5;
    cfg.include_reference = true;
    let tr = simulate_closed_loop(&cfg).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let back = delayctl_core::SimTrace::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, tr);
}

#[test]
fn projection_confines_estimates_under_large_uncertainty() {
    let mut cfg = ScenarioConfig::example(0.06, 0.0);
    cfg.gamma = 1e6;
    cfg.t_final = 3.0;
    cfg.theta_signal[0] = SignalSpec::constant(5.0);
    let tr = simulate_closed_loop(&cfg).unwrap();
    assert!(tr.max_theta_hat_norm() <= cfg.theta_b * (1.0 + 1e-9));
    assert!(tr.sigma_hat.iter().all(|s| s.abs() <= cfg.sigma_bar_b * (1.0 + 1e-9)));
}
