use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::modal::{modal_expansion, Mode};
use crate::error::{Error, Result};
use crate::linalg::{poly_roots, HURWITZ_MARGIN};
use crate::tf::{tf_to_statespace, RationalTf, RationalTfVector};

/// Default absolute tolerance on computed L1 norms.
pub const DEFAULT_TOL: f64 = 1e-5;

/// Base quadrature step relative to the fastest still-active pole.
const STEP_FACTOR: f64 = 0.05;

/// A mode stops constraining the step once its remaining L1 mass is below
/// `tol * ACTIVE_FRACTION`.
const ACTIVE_FRACTION: f64 = 1e-6;

/// Certified L1 norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// Integration horizon `T`.
    pub truncation_time: f64,
    /// Bound on the neglected `∫_T^∞ |h|`.
    pub tail_bound: f64,
    pub tolerance: f64,
}

impl NormResult {
    fn constant(value: f64, tol: f64) -> Self {
        NormResult {
            value,
            truncation_time: 0.0,
            tail_bound: 0.0,
            tolerance: tol,
        }
    }
}

/// `‖G‖_{L1} = |D| + ∫_0^∞ |h(t)| dt` for a proper, stable `G`.
///
/// The impulse response `h(t) = C e^{At} B` of the strictly proper part is
/// propagated exactly with cached matrix exponentials on a graded grid whose
/// spacing follows the fastest mode that still carries L1 mass; `|h|` is
/// integrated piecewise from quadratic interpolants with their sign changes
/// resolved. The horizon `T` is the first time at which the modal tail bound
/// drops below `tol / 2`.
pub fn l1_norm(tf: &RationalTf, tol: f64) -> Result<NormResult> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::invalid("tol", format!("tolerance must be > 0, got {tol}")));
    }
    let sp = tf.strictly_proper_part()?;
    let d = tf.feedthrough().abs();
    if sp.is_zero() || tf.den().degree() == 0 {
        return Ok(NormResult::constant(d, tol));
    }

    let roots = poly_roots(tf.den())?;
    let max_re = roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= -HURWITZ_MARGIN {
        return Err(Error::NotHurwitz {
            max_real_part: max_re,
        });
    }
    let modes = modal_expansion(sp.num(), &roots);
    let alpha = 0.9 * -max_re;
    let horizon = truncation_horizon(&modes, tol / 2.0, 1e6 / alpha)?;

    let ss = tf_to_statespace(&sp)?.balanced();
    let integral = integrate_abs_impulse(&ss.a, &ss.b, &ss.c.row(0), &modes, horizon, tol);
    let tail = modes.iter().map(|m| m.tail(horizon)).sum();
    Ok(NormResult {
        value: d + integral,
        truncation_time: horizon,
        tail_bound: tail,
        tolerance: tol,
    })
}

/// Smallest `T` (to bisection resolution) with modal tail `<= target`.
fn truncation_horizon(modes: &[Mode], target: f64, limit: f64) -> Result<f64> {
    let tail = |t: f64| modes.iter().map(|m| m.tail(t)).sum::<f64>();
    if tail(0.0) <= target {
        return Ok(0.0);
    }
    let slowest = modes.iter().map(Mode::sigma).fold(f64::INFINITY, f64::min);
    let mut hi = 1.0 / slowest;
    while tail(hi) > target {
        hi *= 2.0;
        if hi > limit {
            return Err(Error::TailBoundFailure { limit });
        }
    }
    let mut lo = hi / 2.0;
    if tail(lo) <= target {
        lo = 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-9 * hi {
            break;
        }
    }
    Ok(hi)
}

fn integrate_abs_impulse(
    a: &crate::linalg::Matrix,
    b: &[f64],
    c: &[f64],
    modes: &[Mode],
    horizon: f64,
    tol: f64,
) -> f64 {
    let n = b.len();
    let a = a.as_dmatrix();
    let c = DVector::from_column_slice(c);
    let fastest = modes.iter().map(|m| m.pole.norm()).fold(0.0, f64::max);
    let base = STEP_FACTOR / fastest;

    // Modes ordered by speed; each retires once its tail is negligible.
    let mut by_speed: Vec<&Mode> = modes.iter().collect();
    by_speed.sort_by(|x, y| y.pole.norm().total_cmp(&x.pole.norm()));
    let threshold = tol * ACTIVE_FRACTION;

    let mut propagators: HashMap<u32, DMatrix<f64>> = HashMap::new();
    let mut x = DVector::from_column_slice(b);
    let mut scratch = DVector::zeros(n);
    let mut h0 = c.dot(&x);
    let mut t = 0.0;
    let mut total = 0.0;
    let mut level = 0u32;
    let mut first_active = 0usize;

    while t < horizon {
        while first_active + 1 < by_speed.len() && by_speed[first_active].tail(t) <= threshold {
            first_active += 1;
        }
        let target = STEP_FACTOR / by_speed[first_active].pole.norm();
        while base * f64::powi(2.0, level as i32 + 1) <= target {
            level += 1;
        }
        let mut step = base * f64::powi(2.0, level as i32);
        // The last pair lands exactly on the horizon so that the result
        // varies smoothly with the transfer-function coefficients.
        let last;
        let phi = if t + 2.0 * step >= horizon {
            step = 0.5 * (horizon - t);
            last = (a * step).exp();
            &last
        } else {
            propagators.entry(level).or_insert_with(|| (a * step).exp())
        };
        phi.mul_to(&x, &mut scratch);
        let h1 = c.dot(&scratch);
        phi.mul_to(&scratch, &mut x);
        let h2 = c.dot(&x);
        total += step * abs_quadratic_integral(h0, h1, h2);
        h0 = h2;
        t += 2.0 * step;
        if t >= horizon - 1e-15 * horizon {
            break;
        }
    }
    total
}

/// `∫_0^2 |q(u)| du` for the quadratic through `(0, h0), (1, h1), (2, h2)`.
pub(crate) fn abs_quadratic_integral(h0: f64, h1: f64, h2: f64) -> f64 {
    let c2 = 0.5 * (h0 - 2.0 * h1 + h2);
    let c1 = (h1 - h0) - c2;
    let c0 = h0;
    let anti = |u: f64| u * (c0 + u * (c1 / 2.0 + u * c2 / 3.0));

    let mut cuts = [0.0, 2.0, 2.0, 2.0];
    let mut m = 1;
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale == 0.0 {
        return 0.0;
    }
    let mut push = |r: f64| {
        if r > 0.0 && r < 2.0 {
            cuts[m] = r;
            m += 1;
        }
    };
    if c2.abs() <= 1e-14 * scale {
        if c1 != 0.0 {
            push(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc > 0.0 {
            let sign = if c1 >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (c1 + sign * disc.sqrt());
            push(q / c2);
            if q != 0.0 {
                push(c0 / q);
            }
        }
    }
    cuts[m] = 2.0;
    let pts = &mut cuts[..=m];
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| (anti(w[1]) - anti(w[0])).abs()).sum()
}

/// Induced `L∞ -> L∞` norm of a column operator on a scalar input: the
/// largest entry norm.
pub fn l1_norm_vector(v: &RationalTfVector, tol: f64) -> Result<NormResult> {
    let mut best: Option<NormResult> = None;
    let (mut horizon, mut tail) = (0.0f64, 0.0f64);
    for e in v.iter() {
        let r = l1_norm(e, tol)?;
        horizon = horizon.max(r.truncation_time);
        tail = tail.max(r.tail_bound);
        if best.map_or(true, |b| r.value > b.value) {
            best = Some(r);
        }
    }
    let best = best.expect("vectors are nonempty");
    Ok(NormResult {
        value: best.value,
        truncation_time: horizon,
        tail_bound: tail,
        tolerance: tol,
    })
}

/// Induced `L∞ -> L∞` norm of a transfer matrix given by rows: the largest
/// row sum of entry norms.
pub fn l1_norm_matrix(rows: &[RationalTfVector], tol: f64) -> Result<NormResult> {
    if rows.is_empty() {
        return Err(Error::invalid("rows", "transfer matrix has no rows"));
    }
    let mut out = NormResult::constant(0.0, tol);
    for row in rows {
        let (mut sum, mut tail, mut horizon) = (0.0, 0.0, 0.0f64);
        for e in row.iter() {
            let r = l1_norm(e, tol)?;
            sum += r.value;
            tail += r.tail_bound;
            horizon = horizon.max(r.truncation_time);
        }
        if sum > out.value {
            out.value = sum;
        }
        out.tail_bound = out.tail_bound.max(tail);
        out.truncation_time = out.truncation_time.max(horizon);
    }
    Ok(out)
}

/// Evaluates `h(t)` for a strictly proper transfer function directly from
/// its state-space realization (`t >= 0`).
pub fn impulse_response(tf: &RationalTf, t: f64) -> Result<f64> {
    let ss = tf_to_statespace(&tf.strictly_proper_part()?)?;
    if ss.order() == 0 {
        return Ok(0.0);
    }
    let x = (ss.a.as_dmatrix() * t).exp() * DVector::from_column_slice(&ss.b);
    Ok(DVector::from_column_slice(&ss.c.row(0)).dot(&x))
}
