//! Pseudo-arclength continuation of the stability boundary
//! `f(tau, tau_hat) = level` in the delay plane, together with the
//! identity-line margin and the per-delay compensation band.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::norm::compute_f;

/// `1 / theta_b` for the bound `theta_b = 2`.
pub const DEFAULT_LEVEL: f64 = 0.5;

/// Tuning of the tracer and of the margin searches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationOptions {
    /// Accuracy of every L1 norm evaluation.
    pub tol: f64,
    /// Corrector stops once `|f - level|` is below this.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Finite-difference step in delay units.
    pub fd_step: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_points: usize,
    /// Largest input delay the tracer and the margin searches look at.
    pub tau_max: f64,
    /// Bracketing step of [`find_tau_s`].
    pub margin_step: f64,
    /// Scan step of [`delta_band`].
    pub band_step: f64,
    /// Bisection width of the margin searches.
    pub root_tol: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            tol: 1e-5,
            newton_tol: 1e-5,
            max_newton: 8,
            fd_step: 1e-4,
            h_init: 5e-3,
            h_min: 1e-4,
            h_max: 2e-2,
            max_points: 5000,
            tau_max: 1.0,
            margin_step: 0.02,
            band_step: 5e-3,
            root_tol: 1e-6,
        }
    }
}

impl ContinuationOptions {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("tol", self.tol),
            ("newton_tol", self.newton_tol),
            ("fd_step", self.fd_step),
            ("h_init", self.h_init),
            ("h_min", self.h_min),
            ("h_max", self.h_max),
            ("tau_max", self.tau_max),
            ("margin_step", self.margin_step),
            ("band_step", self.band_step),
            ("root_tol", self.root_tol),
        ];
        for (name, v) in positive {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.h_min > self.h_max {
            return Err(Error::invalid("h_min", "must not exceed h_max"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPoint {
    pub tau: f64,
    pub tau_hat: f64,
    pub f_value: f64,
    /// Unit tangent `(d tau, d tau_hat)`; the stable side is on its left.
    pub tangent: [f64; 2],
    /// The `tau` component of the tangent changed sign since the previous point.
    pub is_fold: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    DomainBoundary,
    StepFailure,
    MaxPoints,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveTrace {
    pub points: Vec<ContinuationPoint>,
    pub level: f64,
    pub k: f64,
    pub termination: Termination,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    k: f64,
    level: f64,
    termination: Termination,
    points: usize,
    folds: usize,
    identity_crossings: Vec<f64>,
}

impl CurveTrace {
    pub fn folds(&self) -> impl Iterator<Item = &ContinuationPoint> {
        self.points.iter().filter(|p| p.is_fold)
    }

    /// Values of `tau` where the curve crosses `tau_hat = tau`, by linear
    /// interpolation between consecutive points.
    pub fn identity_crossings(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for w in self.points.windows(2) {
            let d0 = w[0].tau_hat - w[0].tau;
            let d1 = w[1].tau_hat - w[1].tau;
            if d0 == 0.0 {
                out.push(w[0].tau);
            } else if d0 * d1 < 0.0 {
                let s = d0 / (d0 - d1);
                out.push(w[0].tau + s * (w[1].tau - w[0].tau));
            }
        }
        if let Some(last) = self.points.last() {
            if last.tau_hat == last.tau {
                out.push(last.tau);
            }
        }
        out
    }

    /// Largest distance between consecutive points.
    pub fn max_spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].tau - w[0].tau).hypot(w[1].tau_hat - w[0].tau_hat))
            .fold(0.0, f64::max)
    }

    /// `tau,tau_hat,f,is_fold` rows in curve order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "tau,tau_hat,f,is_fold")?;
        for p in &self.points {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{}", p.tau, p.tau_hat, p.f_value, u8::from(p.is_fold))?;
        }
        Ok(())
    }

    /// Points from a CSV written by [`CurveTrace::write_csv`]. Tangents are
    /// not stored and come back as zero.
    pub fn read_csv_points<R: BufRead>(r: R) -> Result<Vec<ContinuationPoint>> {
        let mut out = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if lineno == 0 {
                if line.trim() != "tau,tau_hat,f,is_fold" {
                    return Err(Error::Parse(format!("unexpected header `{line}`")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 fields", lineno + 1)));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            out.push(ContinuationPoint {
                tau: num(fields[0])?,
                tau_hat: num(fields[1])?,
                f_value: num(fields[2])?,
                tangent: [0.0, 0.0],
                is_fold: fields[3].trim() == "1",
            });
        }
        Ok(out)
    }

    /// JSON sidecar: k, level, termination reason and point count.
    pub fn sidecar_json(&self) -> String {
        let side = Sidecar {
            k: self.k,
            level: self.level,
            termination: self.termination,
            points: self.points.len(),
            folds: self.folds().count(),
            identity_crossings: self.identity_crossings(),
        };
        serde_json::to_string_pretty(&side).expect("sidecar serializes")
    }
}

/// `G(tau, tau_hat) = f - level` for a fixed plant and bandwidth.
struct LevelFn<'a> {
    k: f64,
    a_m: &'a Matrix,
    b: &'a [f64],
    level: f64,
    tol: f64,
}

impl LevelFn<'_> {
    fn eval(&self, tau: f64, tau_hat: f64) -> Result<f64> {
        Ok(compute_f(self.k, tau, tau_hat, self.a_m, self.b, self.tol)? - self.level)
    }

    /// Finite-difference gradient; one-sided next to the domain edges. The
    /// four evaluations run concurrently.
    fn gradient(&self, tau: f64, tau_hat: f64, step: f64, g0: f64) -> Result<[f64; 2]> {
        let stencil = |x: f64| -> (f64, f64, f64) {
            if x >= step {
                (x - step, x + step, 2.0 * step)
            } else {
                (x, x + step, step)
            }
        };
        let (t_lo, t_hi, t_w) = stencil(tau);
        let (h_lo, h_hi, h_w) = stencil(tau_hat);
        let eval_or_center = |t: f64, h: f64, at_center: bool| if at_center { Ok(g0) } else { self.eval(t, h) };
        let ((a, b), (c, d)) = rayon::join(
            || {
                rayon::join(
                    || eval_or_center(t_lo, tau_hat, t_lo == tau),
                    || eval_or_center(t_hi, tau_hat, false),
                )
            },
            || {
                rayon::join(
                    || eval_or_center(tau, h_lo, h_lo == tau_hat),
                    || eval_or_center(tau, h_hi, false),
                )
            },
        );
        Ok([(b? - a?) / t_w, (d? - c?) / h_w])
    }

    /// Newton on one coordinate with the other fixed. `axis` 0 moves `tau`,
    /// 1 moves `tau_hat`. Returns the converged point and its residual.
    fn newton_axis(&self, mut x: [f64; 2], axis: usize, opts: &ContinuationOptions) -> Result<([f64; 2], f64)> {
        let mut g = self.eval(x[0], x[1])?;
        for _ in 0..opts.max_newton {
            if g.abs() <= opts.newton_tol {
                return Ok((x, g));
            }
            let grad = self.gradient(x[0], x[1], opts.fd_step, g)?;
            if grad[axis] == 0.0 {
                break;
            }
            let mut next = x;
            next[axis] -= g / grad[axis];
            if next[axis] < 0.0 {
                next[axis] = 0.5 * x[axis];
            }
            x = next;
            g = self.eval(x[0], x[1])?;
        }
        if g.abs() <= opts.newton_tol {
            Ok((x, g))
        } else {
            Err(Error::StartNotConverged { residual: g })
        }
    }
}

fn unit_tangent(grad: [f64; 2], orientation: f64) -> Option<[f64; 2]> {
    let n = grad[0].hypot(grad[1]);
    if n <= 0.0 || !n.is_finite() {
        return None;
    }
    Some([-orientation * grad[1] / n, orientation * grad[0] / n])
}

enum StepOutcome {
    Accepted { x: [f64; 2], g: f64, grad: [f64; 2], iterations: usize },
    /// The corrector left the quadrant through `tau_hat < 0` (axis 1) or
    /// `tau < 0` (axis 0).
    LeftDomain { axis: usize },
    Failed { stability_lost: bool },
}

fn classify(err: Error) -> Result<StepOutcome> {
    match err {
        Error::StabilityLost { .. } | Error::TailBoundFailure { .. } => Ok(StepOutcome::Failed { stability_lost: true }),
        other => Err(other),
    }
}

/// Predictor along the tangent followed by Newton on
/// `{G = 0, t . (x - x_pred) = 0}`.
fn corrector(
    lf: &LevelFn<'_>,
    pred: [f64; 2],
    t: [f64; 2],
    opts: &ContinuationOptions,
) -> Result<StepOutcome> {
    let mut x = pred;
    for axis in 0..2 {
        if x[axis] < 0.0 {
            return Ok(StepOutcome::LeftDomain { axis });
        }
    }
    let mut g = match lf.eval(x[0], x[1]) {
        Ok(v) => v,
        Err(e) => return classify(e),
    };
    for it in 0..=opts.max_newton {
        let grad = match lf.gradient(x[0], x[1], opts.fd_step, g) {
            Ok(v) => v,
            Err(e) => return classify(e),
        };
        if g.abs() <= opts.newton_tol {
            return Ok(StepOutcome::Accepted { x, g, grad, iterations: it });
        }
        if it == opts.max_newton {
            break;
        }
        // [grad; t] dx = -[g; t.(x - pred)]
        let r2 = t[0] * (x[0] - pred[0]) + t[1] * (x[1] - pred[1]);
        let det = grad[0] * t[1] - grad[1] * t[0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx0 = (-g * t[1] + r2 * grad[1]) / det;
        let dx1 = (-grad[0] * r2 + t[0] * g) / det;
        x = [x[0] + dx0, x[1] + dx1];
        for axis in 0..2 {
            if x[axis] < 0.0 {
                return Ok(StepOutcome::LeftDomain { axis });
            }
        }
        g = match lf.eval(x[0], x[1]) {
            Ok(v) => v,
            Err(e) => return classify(e),
        };
    }
    Ok(StepOutcome::Failed { stability_lost: false })
}

fn check_level(level: f64) -> Result<()> {
    if level <= 0.0 || !level.is_finite() {
        return Err(Error::invalid("level", format!("must be finite and > 0, got {level}")));
    }
    Ok(())
}

/// Traces the level set `f(tau, tau_hat) = level` starting near
/// `start_guess`, initially heading towards larger `tau`.
///
/// The start point is first corrected along `tau_hat` at fixed `tau`. Points
/// leaving the quadrant are landed on the violated axis and end the trace.
pub fn trace_level_curve(
    k: f64,
    a_m: &Matrix,
    b: &[f64],
    level: f64,
    start_guess: (f64, f64),
    opts: &ContinuationOptions,
) -> Result<CurveTrace> {
    check_level(level)?;
    opts.validate()?;
    if k <= 0.0 || !k.is_finite() {
        return Err(Error::invalid("k", format!("filter bandwidth must be > 0, got {k}")));
    }
    let (tau0, th0) = start_guess;
    if !(tau0 >= 0.0 && th0 >= 0.0) {
        return Err(Error::invalid("start_guess", "delays must be non-negative"));
    }
    let lf = LevelFn {
        k,
        a_m,
        b,
        level,
        tol: opts.tol,
    };

    let (x0, g0) = match lf.newton_axis([tau0, th0], 1, opts) {
        Ok(v) => v,
        Err(Error::StartNotConverged { residual }) => return Err(Error::StartNotConverged { residual }),
        Err(Error::StabilityLost { .. }) | Err(Error::TailBoundFailure { .. }) => {
            return Err(Error::StartNotConverged { residual: f64::NAN })
        }
        Err(e) => return Err(e),
    };
    let grad0 = lf.gradient(x0[0], x0[1], opts.fd_step, g0)?;
    let orientation = if -grad0[1] >= 0.0 { 1.0 } else { -1.0 };
    let t0 = unit_tangent(grad0, orientation).ok_or(Error::StartNotConverged { residual: g0 })?;

    let mut points = vec![ContinuationPoint {
        tau: x0[0],
        tau_hat: x0[1],
        f_value: g0 + level,
        tangent: t0,
        is_fold: false,
    }];
    let mut h = opts.h_init.clamp(opts.h_min, opts.h_max);
    let mut easy = 0usize;
    let termination = loop {
        if points.len() >= opts.max_points {
            break Termination::MaxPoints;
        }
        let last = points.last().expect("at least the start point").clone();
        let xl = [last.tau, last.tau_hat];
        let tl = last.tangent;
        let pred = [xl[0] + h * tl[0], xl[1] + h * tl[1]];
        let outcome = corrector(&lf, pred, tl, opts)?;
        let rejected_because_lost = match outcome {
            StepOutcome::Accepted { x, g, grad, iterations } => {
                let dist = (x[0] - xl[0]).hypot(x[1] - xl[1]);
                match unit_tangent(grad, orientation) {
                    Some(t) if dist <= opts.h_max && t[0] * tl[0] + t[1] * tl[1] > 0.5 && x[0] <= opts.tau_max => {
                        let is_fold = t[0] * tl[0] < 0.0 || (t[0] == 0.0) != (tl[0] == 0.0);
                        points.push(ContinuationPoint {
                            tau: x[0],
                            tau_hat: x[1],
                            f_value: g + level,
                            tangent: t,
                            is_fold,
                        });
                        if iterations <= 3 {
                            easy += 1;
                            if easy >= 3 {
                                h = (h * 1.3).min(opts.h_max);
                                easy = 0;
                            }
                        } else {
                            easy = 0;
                        }
                        continue;
                    }
                    Some(_) if x[0] > opts.tau_max && dist <= opts.h_max => break Termination::DomainBoundary,
                    _ => false,
                }
            }
            StepOutcome::LeftDomain { axis } => {
                // Land on the violated axis by moving the other coordinate.
                let mut guess = xl;
                let along = 1 - axis;
                if tl[axis] != 0.0 {
                    let s = -xl[axis] / tl[axis];
                    guess[along] = (xl[along] + s * tl[along]).max(0.0);
                }
                guess[axis] = 0.0;
                if h > 2.0 * opts.h_min {
                    // Approach the edge with a smaller step first.
                    if xl[axis] > opts.h_min {
                        h = (0.5 * h).max(opts.h_min);
                        easy = 0;
                        continue;
                    }
                }
                match lf.newton_axis(guess, along, opts) {
                    Ok((x, g)) => {
                        let dist = (x[0] - xl[0]).hypot(x[1] - xl[1]);
                        if dist <= opts.h_max {
                            let grad = lf.gradient(x[0], x[1], opts.fd_step, g)?;
                            let t = unit_tangent(grad, orientation).unwrap_or(tl);
                            points.push(ContinuationPoint {
                                tau: x[0],
                                tau_hat: x[1],
                                f_value: g + level,
                                tangent: t,
                                is_fold: t[0] * tl[0] < 0.0,
                            });
                        }
                    }
                    Err(Error::StartNotConverged { .. }) | Err(Error::StabilityLost { .. }) => {}
                    Err(e) => return Err(e),
                }
                break Termination::DomainBoundary;
            }
            StepOutcome::Failed { stability_lost } => stability_lost,
        };
        if h <= opts.h_min {
            break if rejected_because_lost {
                Termination::DomainBoundary
            } else {
                Termination::StepFailure
            };
        }
        h = (0.5 * h).max(opts.h_min);
        easy = 0;
    };

    Ok(CurveTrace {
        points,
        level,
        k,
        termination,
    })
}

/// Smallest `tau_hat` on the axis `tau = 0` with `f(0, tau_hat) = level`,
/// from a scan in steps of `opts.margin_step` and bisection.
pub fn find_start_on_axis(k: f64, a_m: &Matrix, b: &[f64], level: f64, opts: &ContinuationOptions) -> Result<f64> {
    check_level(level)?;
    opts.validate()?;
    let lf = LevelFn {
        k,
        a_m,
        b,
        level,
        tol: opts.tol,
    };
    let violated = |th: f64| -> Result<bool> {
        match lf.eval(0.0, th) {
            Ok(g) => Ok(g >= 0.0),
            Err(Error::StabilityLost { .. }) | Err(Error::TailBoundFailure { .. }) => Ok(true),
            Err(e) => Err(e),
        }
    };
    if violated(0.0)? {
        return Err(Error::ConditionViolatedAtZero {
            value: lf.eval(0.0, 0.0).map(|g| (g + level) / level).unwrap_or(f64::INFINITY),
        });
    }
    let (lo, hi) = bracket(0.0, opts.margin_step, opts.tau_max, &violated)?;
    bisect(lo, hi, opts.root_tol, &violated)
}

/// Steps `x0 + j * step` until `violated` holds; returns the bracketing
/// interval.
fn bracket(x0: f64, step: f64, x_max: f64, violated: &dyn Fn(f64) -> Result<bool>) -> Result<(f64, f64)> {
    let mut j = 1usize;
    loop {
        let x = x0 + j as f64 * step;
        if x > x_max {
            return Err(Error::NoRootInRange { tau_max: x_max });
        }
        if violated(x)? {
            return Ok((x - step, x));
        }
        j += 1;
    }
}

/// Bisection of `[ok, bad]` (either order) to width `tol`. Returns the end
/// that still satisfies the condition.
fn bisect(mut ok: f64, mut bad: f64, tol: f64, violated: &dyn Fn(f64) -> Result<bool>) -> Result<f64> {
    while (bad - ok).abs() > tol {
        let mid = 0.5 * (ok + bad);
        if violated(mid)? {
            bad = mid;
        } else {
            ok = mid;
        }
    }
    Ok(ok)
}

/// Time-delay margin on the identity line: the smallest `tau > 0` with
/// `f(tau, tau) * theta_b = 1`.
pub fn find_tau_s(k: f64, a_m: &Matrix, b: &[f64], theta_b: f64, opts: &ContinuationOptions) -> Result<f64> {
    opts.validate()?;
    check_level(theta_b)?;
    let margin = |tau: f64| -> Result<f64> {
        match compute_f(k, tau, tau, a_m, b, opts.tol) {
            Ok(f) => Ok(f * theta_b - 1.0),
            Err(Error::StabilityLost { .. }) | Err(Error::TailBoundFailure { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let m0 = margin(0.0)?;
    if m0 >= 0.0 {
        return Err(Error::ConditionViolatedAtZero { value: m0 + 1.0 });
    }
    let violated = |tau: f64| Ok(margin(tau)? >= 0.0);
    let (lo, hi) = bracket(0.0, opts.margin_step, opts.tau_max, &violated)?;
    bisect(lo, hi, opts.root_tol, &violated)
}

/// Compensation delays around `tau_hat = tau` for which the stability
/// condition holds: `tau_hat` in `[tau - delta_lower, tau + delta_upper]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompensationBand {
    pub tau: f64,
    pub delta_lower: f64,
    pub delta_upper: f64,
    /// The lower end reached `tau_hat = 0` without violating the condition.
    pub clipped: bool,
}

impl CompensationBand {
    pub fn width(&self) -> f64 {
        self.delta_lower + self.delta_upper
    }

    pub fn tau_hat_range(&self) -> (f64, f64) {
        (self.tau - self.delta_lower, self.tau + self.delta_upper)
    }
}

/// Scans `tau_hat` outward from `tau` in steps of `opts.band_step` until the
/// condition `f * theta_b < 1` fails (a lost Hurwitz property counts as a
/// failure), then bisects each end to `opts.root_tol`.
pub fn delta_band(
    k: f64,
    a_m: &Matrix,
    b: &[f64],
    theta_b: f64,
    tau: f64,
    opts: &ContinuationOptions,
) -> Result<CompensationBand> {
    opts.validate()?;
    check_level(theta_b)?;
    if tau < 0.0 || !tau.is_finite() {
        return Err(Error::invalid("tau", format!("must be finite and >= 0, got {tau}")));
    }
    let margin = |th: f64| -> Result<f64> {
        match compute_f(k, tau, th, a_m, b, opts.tol) {
            Ok(f) => Ok(f * theta_b - 1.0),
            Err(Error::StabilityLost { .. }) | Err(Error::TailBoundFailure { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let m = margin(tau)?;
    if m >= 0.0 {
        return Err(Error::ConditionViolatedOnIdentity { tau, value: m + 1.0 });
    }
    let violated = |th: f64| Ok(margin(th)? >= 0.0);

    let (lo, hi) = bracket(tau, opts.band_step, tau + opts.tau_max, &violated)?;
    let upper = bisect(lo, hi, opts.root_tol, &violated)?;

    let mut j = 1usize;
    let (lower, clipped) = loop {
        let th = tau - j as f64 * opts.band_step;
        if th <= 0.0 {
            if violated(0.0)? {
                break (bisect(th + opts.band_step, 0.0, opts.root_tol, &violated)?, false);
            }
            break (0.0, true);
        }
        if violated(th)? {
            break (bisect(th + opts.band_step, th, opts.root_tol, &violated)?, false);
        }
        j += 1;
    };

    Ok(CompensationBand {
        tau,
        delta_lower: tau - lower,
        delta_upper: upper - tau,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plant() -> (Matrix, Vec<f64>) {
        (
            Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -1.4]]).unwrap(),
            vec![0.0, 1.0],
        )
    }

    #[test]
    fn bisection_keeps_the_good_end() {
        let v = |x: f64| Ok(x >= 0.3);
        let r = bisect(0.0, 1.0, 1e-9, &v).unwrap();
        assert!(r < 0.3 && 0.3 - r <= 1e-9);
        let r = bisect(1.0, 0.0, 1e-9, &|x: f64| Ok(x <= 0.3)).unwrap();
        assert!(r > 0.3 && r - 0.3 <= 1e-9);
    }

    #[test]
    fn bracket_reports_missing_root() {
        let v = |_: f64| Ok(false);
        assert!(matches!(bracket(0.0, 0.1, 0.35, &v), Err(Error::NoRootInRange { .. })));
    }

    #[test]
    fn invalid_level_is_rejected() {
        let (a, b) = plant();
        let opts = ContinuationOptions::default();
        for level in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                trace_level_curve(25.0, &a, &b, level, (0.0, 0.4), &opts),
                Err(Error::InvalidArgument { arg: "level", .. })
            ));
        }
    }

    #[test]
    fn tau_s_for_k25() {
        let (a, b) = plant();
        let opts = ContinuationOptions {
            root_tol: 1e-4,
            ..Default::default()
        };
        let ts = find_tau_s(25.0, &a, &b, 2.0, &opts).unwrap();
        assert!((ts - 0.212).abs() < 0.02, "{ts}");
    }

    #[test]
    fn condition_violated_at_zero() {
        let (a, b) = plant();
        // f(0,0) is about 0.085 at k = 25, so theta_b = 20 breaks the condition.
        let err = find_tau_s(25.0, &a, &b, 20.0, &ContinuationOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ConditionViolatedAtZero { .. }));
    }

    #[test]
    fn band_off_identity_fails_past_margin() {
        let (a, b) = plant();
        let err = delta_band(25.0, &a, &b, 2.0, 0.3, &ContinuationOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ConditionViolatedOnIdentity { .. }));
    }

    #[test]
    fn band_clips_at_zero_for_small_tau() {
        let (a, b) = plant();
        let band = delta_band(25.0, &a, &b, 2.0, 0.01, &ContinuationOptions::default()).unwrap();
        assert!(band.clipped);
        assert_eq!(band.delta_lower, 0.01);
        assert!(band.delta_upper > 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let trace = CurveTrace {
            points: vec![
                ContinuationPoint {
                    tau: 0.0,
                    tau_hat: 0.44,
                    f_value: 0.5,
                    tangent: [1.0, 0.0],
                    is_fold: false,
                },
                ContinuationPoint {
                    tau: 0.1 + 1e-17,
                    tau_hat: 1.0 / 3.0,
                    f_value: 0.500001,
                    tangent: [-1.0, 0.0],
                    is_fold: true,
                },
            ],
            level: 0.5,
            k: 25.0,
            termination: Termination::DomainBoundary,
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let back = CurveTrace::read_csv_points(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        for (p, q) in trace.points.iter().zip(&back) {
            assert_eq!((p.tau, p.tau_hat, p.f_value, p.is_fold), (q.tau, q.tau_hat, q.f_value, q.is_fold));
        }
        let side: serde_json::Value = serde_json::from_str(&trace.sidecar_json()).unwrap();
        assert_eq!(side["termination"], "domain-boundary");
        assert_eq!(side["points"], 2);
    }

    #[test]
    fn identity_crossing_interpolates() {
        let p = |tau: f64, tau_hat: f64| ContinuationPoint {
            tau,
            tau_hat,
            f_value: 0.5,
            tangent: [1.0, 0.0],
            is_fold: false,
        };
        let trace = CurveTrace {
            points: vec![p(0.1, 0.2), p(0.3, 0.2)],
            level: 0.5,
            k: 25.0,
            termination: Termination::MaxPoints,
        };
        let c = trace.identity_crossings();
        assert_eq!(c.len(), 1);
        assert!((c[0] - 0.2).abs() < 1e-15);
    }
}
