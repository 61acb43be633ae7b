//! Modal (partial-fraction) expansion of impulse responses and certified
//! bounds on their tails.

use num_complex::Complex64;

use crate::linalg::{cluster_roots, Polynomial, RootCluster, CLUSTER_TOL};

/// One pole cluster of a strictly proper `num / den` with monic `den`.
///
/// Contributes `sum_j coeffs[j] t^j / j! e^{pole t}` to the impulse response.
#[derive(Clone, Debug)]
pub struct Mode {
    pub pole: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl Mode {
    /// Decay rate `-Re(pole)`.
    pub fn sigma(&self) -> f64 {
        -self.pole.re
    }

    /// Upper bound on `∫_T^∞ |mode(t)| dt`, from
    /// `∫_T^∞ t^q/q! e^{-σt} dt = e^{-σT} Σ_{i≤q} T^i / (i! σ^{q-i+1})`.
    pub fn tail(&self, t: f64) -> f64 {
        let sigma = self.sigma();
        let decay = (-sigma * t).exp();
        if decay == 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for (q, a) in self.coeffs.iter().enumerate() {
            let mag = a.norm();
            if mag == 0.0 {
                continue;
            }
            let mut sum = 0.0;
            let mut term = 1.0; // T^i / i!
            for i in 0..=q {
                if i > 0 {
                    term *= t / i as f64;
                }
                sum += term / sigma.powi((q - i + 1) as i32);
            }
            total += mag * sum;
        }
        total * decay
    }
}

/// Taylor coefficients of a real polynomial at `z` up to order `order`
/// (repeated synthetic division).
fn taylor_poly(p: &Polynomial, z: Complex64, order: usize) -> Vec<Complex64> {
    let mut work: Vec<Complex64> = p.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let mut out = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        if work.is_empty() {
            out.push(Complex64::new(0.0, 0.0));
            continue;
        }
        // Divide by (s - z): remainder is the value, quotient continues.
        let n = work.len();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut quotient = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        for i in (0..n).rev() {
            acc = acc * z + work[i];
            if i > 0 {
                quotient[i - 1] = acc;
            }
        }
        out.push(acc);
        work = quotient;
    }
    out
}

fn series_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..(n - i) {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// Taylor coefficients at `z` of `(s - c)^{-m}` up to `order`.
fn taylor_inverse_power(z: Complex64, c: Complex64, m: usize, order: usize) -> Vec<Complex64> {
    let d = z - c;
    let inv = d.inv();
    let mut out = Vec::with_capacity(order + 1);
    // (d + e)^{-m} = d^{-m} Σ_l binom(-m, l) (e/d)^l
    let mut coef = inv.powi(m as i32);
    for l in 0..=order {
        out.push(coef);
        coef *= -((m + l) as f64) / (l + 1) as f64 * inv;
    }
    out
}

/// Confluent partial-fraction expansion of `num / den` (monic `den` with the
/// given roots). Roots closer than the clustering tolerance are merged into
/// one pole of the combined multiplicity.
pub fn modal_expansion(num: &Polynomial, roots: &[Complex64]) -> Vec<Mode> {
    let clusters = cluster_roots(roots, CLUSTER_TOL);
    expansion_from_clusters(num, &clusters)
}

pub fn expansion_from_clusters(num: &Polynomial, clusters: &[RootCluster]) -> Vec<Mode> {
    clusters
        .iter()
        .enumerate()
        .map(|(idx, cl)| {
            let m = cl.multiplicity;
            let order = m - 1;
            let mut g = taylor_poly(num, cl.center, order);
            for (jdx, other) in clusters.iter().enumerate() {
                if jdx != idx {
                    let t = taylor_inverse_power(cl.center, other.center, other.multiplicity, order);
                    g = series_mul(&g, &t);
                }
            }
            // Coefficient of t^j/j! is the Taylor coefficient of order m-1-j.
            let coeffs = (0..m).map(|j| g[order - j]).collect();
            Mode {
                pole: cl.center,
                coeffs,
            }
        })
        .collect()
}

/// Tail bound summed over modes.
pub fn total_tail(modes: &[Mode], t: f64) -> f64 {
    modes.iter().map(|m| m.tail(t)).sum()
}

/// Impulse response evaluated from the modal expansion (real part).
pub fn modal_impulse(modes: &[Mode], t: f64) -> f64 {
    let mut h = Complex64::new(0.0, 0.0);
    for m in modes {
        let e = (m.pole * t).exp();
        let mut term = 1.0;
        for (j, a) in m.coeffs.iter().enumerate() {
            if j > 0 {
                term *= t / j as f64;
            }
            h += a * term * e;
        }
    }
    h.re
}
