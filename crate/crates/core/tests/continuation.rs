use delayctl_core::continuation::{
    delta_band, find_start_on_axis, find_tau_s, trace_level_curve, ContinuationOptions, CurveTrace, DEFAULT_LEVEL,
};
use delayctl_core::linalg::Matrix;
use delayctl_core::norm::{compute_f, compute_fbar};
use delayctl_core::Error;

fn plant() -> (Matrix, Vec<f64>) {
    (Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -1.4]]).unwrap(), vec![0.0, 1.0])
}

fn short_trace(k: f64) -> CurveTrace {
    let (a, b) = plant();
    let opts = ContinuationOptions {
        max_points: 25,
        ..Default::default()
    };
    let start = find_start_on_axis(k, &a, &b, DEFAULT_LEVEL, &opts).unwrap();
    trace_level_curve(k, &a, &b, DEFAULT_LEVEL, (0.0, start), &opts).unwrap()
}

#[test]
fn points_lie_on_the_level_set_when_recomputed() {
    let (a, b) = plant();
    let tr = short_trace(50.0);
    assert_eq!(tr.points.len(), 25);
    for p in &tr.points {
        let f = compute_f(50.0, p.tau, p.tau_hat, &a, &b, 1e-5).unwrap();
        assert!((f - DEFAULT_LEVEL).abs() <= 2e-5, "{p:?} -> {f}");
        assert!(p.tau >= 0.0 && p.tau_hat >= 0.0);
    }
}

#[test]
fn consecutive_points_are_close_and_tangents_agree() {
    let tr = short_trace(25.0);
    let h_max = ContinuationOptions::default().h_max;
    assert!(tr.max_spacing() <= h_max + 1e-12);
    for w in tr.points.windows(2) {
        let dot = w[0].tangent[0] * w[1].tangent[0] + w[0].tangent[1] * w[1].tangent[1];
        assert!(dot > 0.0);
    }
}

#[test]
fn tracing_is_deterministic() {
    assert_eq!(short_trace(25.0).points, short_trace(25.0).points);
}

#[test]
fn csv_round_trip() {
    let tr = short_trace(25.0);
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let back = CurveTrace::read_csv_points(buf.as_slice()).unwrap();
    assert_eq!(back.len(), tr.points.len());
    for (p, q) in tr.points.iter().zip(&back) {
        assert_eq!((p.tau, p.tau_hat, p.is_fold), (q.tau, q.tau_hat, q.is_fold));
    }
}

#[test]
fn identity_line_values_agree_with_fbar() {
    let (a, b) = plant();
    for tau in [0.0, 0.05, 0.15, 0.21] {
        let f = compute_f(25.0, tau, tau, &a, &b, 1e-6).unwrap();
        let fbar = compute_fbar(25.0, tau, &a, &b, 1e-6).unwrap();
        assert!((f - fbar).abs() <= 1e-8, "{tau}: {f} vs {fbar}");
    }
}

#[test]
fn band_endpoints_sit_on_the_condition_boundary() {
    let (a, b) = plant();
    let opts = ContinuationOptions::default();
    let band = delta_band(50.0, &a, &b, 2.0, 0.15, &opts).unwrap();
    assert!(!band.clipped);
    let (lo, hi) = band.tau_hat_range();
    for th in [lo, hi] {
        let value = compute_f(50.0, 0.15, th, &a, &b, opts.tol).unwrap() * 2.0;
        assert!((value - 1.0).abs() <= 10.0 * opts.tol, "{th}: {value}");
    }
}

#[test]
fn band_is_clipped_at_zero_compensation_delay() {
    let (a, b) = plant();
    let band = delta_band(25.0, &a, &b, 2.0, 0.01, &ContinuationOptions::default()).unwrap();
    assert!(band.clipped);
    assert_eq!(band.delta_lower, 0.01);
}

#[test]
fn margin_errors() {
    let (a, b) = plant();
    let opts = ContinuationOptions::default();
    assert!(matches!(
        find_tau_s(25.0, &a, &b, 100.0, &opts),
        Err(Error::ConditionViolatedAtZero { .. })
    ));
    let short = ContinuationOptions {
        tau_max: 0.1,
        ..Default::default()
    };
    assert!(matches!(find_tau_s(25.0, &a, &b, 2.0, &short), Err(Error::NoRootInRange { .. })));
    assert!(matches!(
        delta_band(25.0, &a, &b, 2.0, 0.3, &opts),
        Err(Error::ConditionViolatedOnIdentity { .. })
    ));
}
