use super::history::HistoryBuffer;
use super::projection::{proj, proj_scalar, renormalize};
use super::scenario::ScenarioConfig;
use super::signal::eval_into;
use super::trace::{DesiredTrace, ReferenceTrace, SimTrace};
use crate::error::Result;
use crate::linalg::solve_lyapunov;

/// `‖x‖_∞` above which a run is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Classical RK4 step of `z' = f(t, z)`.
struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Rk4 {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn step(&mut self, t: f64, h: f64, z: &mut [f64], mut f: impl FnMut(f64, &[f64], &mut [f64])) {
        let n = z.len();
        f(t, z, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = z[i] + 0.5 * h * self.k1[i];
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = z[i] + 0.5 * h * self.k2[i];
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = z[i] + h * self.k3[i];
        }
        f(t + h, &self.tmp, &mut self.k4);
        for i in 0..n {
            z[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Row-major copy of a square matrix for the inner loops.
struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    fn new(m: &crate::linalg::Matrix) -> Self {
        Dense {
            n: m.rows(),
            a: m.row_major(),
        }
    }

    fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        let row = &self.a[i * self.n..(i + 1) * self.n];
        row.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Delayed value: the current stage value for a zero delay, otherwise the
/// stored history.
fn delayed(buf: &HistoryBuffer, t: f64, delay: f64, current: f64) -> f64 {
    if delay == 0.0 {
        current
    } else {
        buf.lookup(t - delay)
    }
}

fn steps_of(cfg: &ScenarioConfig) -> (f64, usize) {
    let h = cfg.step();
    (h, (cfg.t_final / h).round() as usize)
}

/// Simulates the plant with input delay under the adaptive controller with a
/// delayed state predictor, alongside the desired system (and, when
/// `include_reference` is set, the nonadaptive reference system).
///
/// The control law uses `-k_d y_d`, the sign under which the adaptive and
/// reference control signals share the same desired-trajectory term.
pub fn simulate_closed_loop(cfg: &ScenarioConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let p = solve_lyapunov(&cfg.a_sp)?;
    let n = cfg.order();
    let pb = p.mul_vec(&cfg.b);
    let a_m = Dense::new(&cfg.a_m);
    let a_sp = Dense::new(&cfg.a_sp);
    let (h, steps) = steps_of(cfg);
    let stride = cfg.stride();
    let with_ref = cfg.include_reference;
    let max_delay = cfg.tau.max(cfg.tau_hat);

    // Layout: x | x̂ | u | θ̂ | σ̂ | x_des | [x_ref | u_ref]
    let (ix, ixh, iu, ith, ish, ixd, ixr) = (0, n, 2 * n, 2 * n + 1, 3 * n + 1, 3 * n + 2, 4 * n + 2);
    let iur = 5 * n + 2;
    let dim = if with_ref { 5 * n + 3 } else { 4 * n + 2 };
    let mut z = vec![0.0; dim];
    z[ix..ix + n].copy_from_slice(&cfg.x0);
    z[ixh..ixh + n].copy_from_slice(&cfg.x0);
    z[ith..ith + n].copy_from_slice(&cfg.theta_hat0);
    z[ish] = cfg.sigma_hat0;
    z[ixd..ixd + n].copy_from_slice(&cfg.x_des0);
    if with_ref {
        z[ixr..ixr + n].copy_from_slice(&cfg.x0);
    }

    let mut u_hist = HistoryBuffer::new(max_delay + 2.0 * h, h);
    let mut ur_hist = HistoryBuffer::new(max_delay + 2.0 * h, h);
    u_hist.push(0.0, 0.0);
    ur_hist.push(0.0, 0.0);

    let mut trace = SimTrace::with_capacity(n, steps / stride + 1, with_ref);
    let mut rk = Rk4::new(dim);
    let mut theta = vec![0.0; n];
    let mut x_tilde = vec![0.0; n];
    let mut raw = vec![0.0; n];
    let mut proj_out = vec![0.0; n];

    let record = |trace: &mut SimTrace, t: f64, z: &[f64]| {
        let x = &z[ix..ix + n];
        let xd = &z[ixd..ixd + n];
        trace.push_sample(
            t,
            x,
            &z[ixh..ixh + n],
            z[iu],
            &z[ith..ith + n],
            z[ish],
            dot(&cfg.c, x),
            dot(&cfg.c, xd),
            with_ref.then(|| (&z[ixr..ixr + n], z[iur], dot(&cfg.c, &z[ixr..ixr + n]))),
        );
    };
    record(&mut trace, 0.0, &z);

    for step in 0..steps {
        let t = step as f64 * h;
        rk.step(t, h, &mut z, |ts, zs, dz| {
            eval_into(&cfg.theta_signal, ts, &mut theta);
            let sigma = cfg.sigma_signal.eval(ts);
            let yd = cfg.yd_signal.eval(ts);
            let x = &zs[ix..ix + n];
            let xh = &zs[ixh..ixh + n];
            let th = &zs[ith..ith + n];
            let u = zs[iu];
            let sh = zs[ish];
            let u_tau = delayed(&u_hist, ts, cfg.tau, u);
            let u_tau_hat = delayed(&u_hist, ts, cfg.tau_hat, u);

            for i in 0..n {
                x_tilde[i] = xh[i] - x[i];
            }
            let theta_x = dot(&theta, x);
            let th_x = dot(th, x);
            let plant_in = u_tau + theta_x + sigma;
            let pred_in = u_tau_hat + th_x + sh;
            for i in 0..n {
                let am_x = a_m.row_dot(i, x);
                dz[ix + i] = am_x + cfg.b[i] * plant_in;
                dz[ixh + i] = am_x + a_sp.row_dot(i, &x_tilde) + cfg.b[i] * pred_in;
                dz[ixd + i] = a_m.row_dot(i, &zs[ixd..ixd + n]) + cfg.b[i] * yd;
            }
            dz[iu] = -cfg.k * (u + th_x + sh - cfg.k_d * yd);

            let xt_pb = dot(&x_tilde, &pb);
            for i in 0..n {
                raw[i] = -xt_pb * x[i];
            }
            proj(th, &raw, cfg.theta_b, cfg.nu, &mut proj_out);
            for i in 0..n {
                dz[ith + i] = cfg.gamma * proj_out[i];
            }
            dz[ish] = cfg.gamma * proj_scalar(sh, -xt_pb, cfg.sigma_bar_b, cfg.nu);

            if with_ref {
                let xr = &zs[ixr..ixr + n];
                let ur = zs[iur];
                let ur_tau = delayed(&ur_hist, ts, cfg.tau, ur);
                let ur_tau_hat = delayed(&ur_hist, ts, cfg.tau_hat, ur);
                let eta = dot(&theta, xr) + sigma;
                for i in 0..n {
                    dz[ixr + i] = a_m.row_dot(i, xr) + cfg.b[i] * (ur_tau + eta);
                }
                dz[iur] = -cfg.k * (ur_tau - ur_tau_hat + ur + eta - cfg.k_d * yd);
            }
        });
        renormalize(&mut z[ith..ith + n], cfg.theta_b);
        renormalize(&mut z[ish..ish + 1], cfg.sigma_bar_b);

        let t_next = (step + 1) as f64 * h;
        u_hist.push(t_next, z[iu]);
        if with_ref {
            ur_hist.push(t_next, z[iur]);
        }

        let x_inf = z[ix..ix + n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ref_bad = with_ref && z[ixr..ixr + n].iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_THRESHOLD);
        if x_inf > DIVERGENCE_THRESHOLD || ref_bad || z.iter().any(|v| !v.is_finite()) {
            trace.mark_diverged();
            return Ok(trace);
        }
        if (step + 1) % stride == 0 {
            record(&mut trace, t_next, &z);
        }
    }
    Ok(trace)
}

/// Nonadaptive reference system: plant copy driven by the delay-dependent
/// filter with the true uncertainties.
pub fn simulate_reference(cfg: &ScenarioConfig) -> Result<ReferenceTrace> {
    cfg.validate()?;
    let n = cfg.order();
    let a_m = Dense::new(&cfg.a_m);
    let (h, steps) = steps_of(cfg);
    let stride = cfg.stride();
    let mut z = vec![0.0; n + 1];
    z[..n].copy_from_slice(&cfg.x0);
    let mut hist = HistoryBuffer::new(cfg.tau.max(cfg.tau_hat) + 2.0 * h, h);
    hist.push(0.0, 0.0);
    let mut theta = vec![0.0; n];
    let mut rk = Rk4::new(n + 1);
    let mut trace = ReferenceTrace::default();
    trace.push(0.0, &z[..n], z[n], dot(&cfg.c, &z[..n]));

    for step in 0..steps {
        let t = step as f64 * h;
        rk.step(t, h, &mut z, |ts, zs, dz| {
            eval_into(&cfg.theta_signal, ts, &mut theta);
            let yd = cfg.yd_signal.eval(ts);
            let (xr, ur) = (&zs[..n], zs[n]);
            let ur_tau = delayed(&hist, ts, cfg.tau, ur);
            let ur_tau_hat = delayed(&hist, ts, cfg.tau_hat, ur);
            let eta = dot(&theta, xr) + cfg.sigma_signal.eval(ts);
            for i in 0..n {
                dz[i] = a_m.row_dot(i, xr) + cfg.b[i] * (ur_tau + eta);
            }
            dz[n] = -cfg.k * (ur_tau - ur_tau_hat + ur + eta - cfg.k_d * yd);
        });
        let t_next = (step + 1) as f64 * h;
        hist.push(t_next, z[n]);
        if z.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_THRESHOLD) {
            trace.diverged = true;
            return Ok(trace);
        }
        if (step + 1) % stride == 0 {
            trace.push(t_next, &z[..n], z[n], dot(&cfg.c, &z[..n]));
        }
    }
    Ok(trace)
}

/// Desired system `x_des' = A_m x_des + b y_d`, `y_des = cᵀ x_des`.
pub fn simulate_desired(cfg: &ScenarioConfig) -> Result<DesiredTrace> {
    cfg.validate()?;
    let n = cfg.order();
    let a_m = Dense::new(&cfg.a_m);
    let (h, steps) = steps_of(cfg);
    let stride = cfg.stride();
    let mut z = cfg.x_des0.clone();
    let mut rk = Rk4::new(n);
    let mut trace = DesiredTrace::default();
    trace.push(0.0, &z, dot(&cfg.c, &z));
    for step in 0..steps {
        rk.step(step as f64 * h, h, &mut z, |ts, zs, dz| {
            let yd = cfg.yd_signal.eval(ts);
            for i in 0..n {
                dz[i] = a_m.row_dot(i, zs) + cfg.b[i] * yd;
            }
        });
        if (step + 1) % stride == 0 {
            trace.push((step + 1) as f64 * h, &z, dot(&cfg.c, &z));
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SignalSpec;

    fn quiet(tau: f64, tau_hat: f64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::example(tau, tau_hat);
        cfg.theta_signal = vec![SignalSpec::zero(), SignalSpec::zero()];
        cfg.sigma_signal = SignalSpec::zero();
        cfg.yd_signal = SignalSpec::zero();
        cfg.x0 = vec![0.0, 0.0];
        cfg.x_des0 = vec![0.0, 0.0];
        cfg.gamma = 1e5;
        cfg.t_final = 1.0;
        cfg.include_reference = true;
        cfg
    }

    #[test]
    fn equilibrium_stays_at_zero() {
        let tr = simulate_closed_loop(&quiet(0.06, 0.02)).unwrap();
        assert!(!tr.diverged);
        assert!(tr.x.iter().flatten().all(|v| *v == 0.0));
        assert!(tr.u.iter().all(|v| *v == 0.0));
        assert!(tr.u_ref.as_ref().unwrap().iter().all(|v| *v == 0.0));
        let r = simulate_reference(&quiet(0.06, 0.02)).unwrap();
        assert!(r.u_ref.iter().all(|v| *v == 0.0));
        let d = simulate_desired(&quiet(0.06, 0.02)).unwrap();
        assert!(d.y_des.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn desired_system_decays() {
        let mut cfg = quiet(0.0, 0.0);
        cfg.x_des0 = vec![1.0, 0.0];
        cfg.t_final = 10.0;
        let d = simulate_desired(&cfg).unwrap();
        let last = d.x_des.last().unwrap();
        assert!(last.iter().map(|v| v * v).sum::<f64>().sqrt() < 0.05);
        assert!((d.t.last().unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn embedded_reference_matches_standalone_run() {
        let mut cfg = ScenarioConfig::example(0.05, 0.05);
        cfg.gamma = 1e5;
        cfg.t_final = 2.0;
        cfg.include_reference = true;
        let full = simulate_closed_loop(&cfg).unwrap();
        let alone = simulate_reference(&cfg).unwrap();
        let a = full.u_ref.as_ref().unwrap();
        assert_eq!(a.len(), alone.u_ref.len());
        for (p, q) in a.iter().zip(&alone.u_ref) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
