//! Simultaneous (Aberth–Ehrlich) polynomial root finding.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::poly::Polynomial;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;

/// Roots with real part at or above `-HURWITZ_MARGIN` count as unstable.
pub const HURWITZ_MARGIN: f64 = 1e-9;

/// Relative distance under which roots are reported as one multiple root.
pub const CLUSTER_TOL: f64 = 1e-6;

/// All complex roots of `p`, sorted by real then imaginary part.
///
/// Initial guesses come from the Newton polygon of the coefficient
/// magnitudes so that polynomials whose roots span many orders of magnitude
/// (Padé products at small delays) start every root on the right circle.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    let degree = p.degree();
    if degree == 0 {
        return Err(Error::invalid("p", "root finding needs degree >= 1"));
    }
    let c = p.coeffs();
    let zeros_at_origin = c.iter().take_while(|&&v| v == 0.0).count();
    let reduced = &c[zeros_at_origin..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];

    let n = reduced.len() - 1;
    if n == 1 {
        roots.push(Complex64::new(-reduced[0] / reduced[1], 0.0));
    } else if n > 1 {
        roots.extend(aberth(reduced)?);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// True iff every root has real part below `-HURWITZ_MARGIN`.
pub fn is_hurwitz(p: &Polynomial) -> Result<bool> {
    Ok(poly_roots(p)?.iter().all(|z| z.re < -HURWITZ_MARGIN))
}

/// A group of numerically coincident roots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
}

/// Groups roots closer than `tol * max(1, |z|)` (single linkage).
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<RootCluster> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= tol * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match clusters.iter_mut().find(|(l, _, _)| *l == r) {
            Some((_, sum, count)) => {
                *sum += roots[i];
                *count += 1;
            }
            None => clusters.push((r, roots[i], 1)),
        }
    }
    clusters
        .into_iter()
        .map(|(_, sum, count)| RootCluster {
            center: sum / count as f64,
            multiplicity: count,
        })
        .collect()
}

fn aberth(c: &[f64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    let mut z = initial_guesses(c);
    let mut done = vec![false; n];
    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let Some(ratio) = newton_ratio(c, zi) else {
                done[i] = true;
                continue;
            };
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = zi - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            z[i] = zi - step;
            if !z[i].re.is_finite() || !z[i].im.is_finite() {
                z[i] = zi + Complex64::new(1e-3, 1e-3) * zi.norm().max(1.0);
            }
            if step.norm() <= 2.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        best: z,
    })
}

/// `p(z) / p'(z)`, or `None` when `p(z)` is already zero to rounding level.
///
/// Outside the unit disc the reversed polynomial is evaluated at `1/z` to
/// avoid overflow.
fn newton_ratio(c: &[f64], z: Complex64) -> Option<Complex64> {
    let n = c.len() - 1;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if z.norm() <= 1.0 {
        let (mut p, mut dp, mut bound) = (zero, zero, 0.0);
        let az = z.norm();
        for &ck in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + ck;
            bound = bound * az + ck.abs();
        }
        if p.norm() <= 4.0 * f64::EPSILON * bound {
            return None;
        }
        Some(if dp.norm() == 0.0 { p } else { p / dp })
    } else {
        let w = one / z;
        let aw = w.norm();
        let (mut q, mut dq, mut bound) = (zero, zero, 0.0);
        for &ck in c.iter() {
            dq = dq * w + q;
            q = q * w + ck;
            bound = bound * aw + ck.abs();
        }
        if q.norm() <= 4.0 * f64::EPSILON * bound {
            return None;
        }
        // p'/p = w (n - w q'(w) / q(w))
        let log_deriv = w * (Complex64::new(n as f64, 0.0) - w * dq / q);
        Some(if log_deriv.norm() == 0.0 { z } else { one / log_deriv })
    }
}

/// Starting points on circles whose radii follow the upper convex hull of
/// `(i, ln|c_i|)` (Bini's Newton-polygon initialization).
fn initial_guesses(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i, v.abs().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, j) = (w[0].0, w[1].0);
        let count = j - i;
        let radius = ((w[0].1 - w[1].1) / count as f64).exp();
        for m in 0..count {
            let angle = TAU * m as f64 / count as f64 + TAU * i as f64 / n as f64 + 0.4;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}
