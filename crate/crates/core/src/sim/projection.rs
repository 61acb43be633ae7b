//! Projection operator confining adaptive estimates to a ball.

/// Convex indicator `((1+ν) θᵀθ - θ_b²) / (ν θ_b²)`: zero on the sphere of
/// radius `θ_b / sqrt(1+ν)` and one on the sphere of radius `θ_b`.
pub fn indicator(estimate: &[f64], bound: f64, nu: f64) -> f64 {
    let sq: f64 = estimate.iter().map(|v| v * v).sum();
    ((1.0 + nu) * sq - bound * bound) / (nu * bound * bound)
}

/// `Proj(θ, y)`: returns `y` unless `θ` is in the transition layer and `y`
/// points outward, in which case the outward component is scaled by
/// `1 - φ(θ)`.
pub fn proj(estimate: &[f64], raw: &[f64], bound: f64, nu: f64, out: &mut [f64]) {
    out.copy_from_slice(raw);
    let phi = indicator(estimate, bound, nu);
    if phi <= 0.0 {
        return;
    }
    // ∇φ is parallel to θ; only its direction matters here.
    let grad_sq: f64 = estimate.iter().map(|v| v * v).sum();
    if grad_sq == 0.0 {
        return;
    }
    let dot: f64 = estimate.iter().zip(raw).map(|(g, y)| g * y).sum();
    if dot <= 0.0 {
        return;
    }
    let factor = phi * dot / grad_sq;
    for (o, g) in out.iter_mut().zip(estimate) {
        *o -= factor * g;
    }
}

/// Scalar specialization of [`proj`].
pub fn proj_scalar(estimate: f64, raw: f64, bound: f64, nu: f64) -> f64 {
    let mut out = [0.0];
    proj(&[estimate], &[raw], bound, nu, &mut out);
    out[0]
}

/// Pulls `v` back onto the ball of radius `bound` if it exceeds it by more
/// than a relative `1e-9` (rounding drift of the integrator).
pub fn renormalize(v: &mut [f64], bound: f64) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > bound * (1.0 + 1e-9) {
        let s = bound / norm;
        v.iter_mut().for_each(|x| *x *= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_is_unchanged() {
        let mut out = [0.0; 2];
        proj(&[0.0, 0.0], &[3.0, -4.0], 2.0, 0.1, &mut out);
        assert_eq!(out, [3.0, -4.0]);
    }

    #[test]
    fn boundary_annihilates_outward_push() {
        let theta = [2.0f64.sqrt(), 2.0f64.sqrt()];
        assert!((indicator(&theta, 2.0, 0.1) - 1.0).abs() < 1e-12);
        let mut out = [0.0; 2];
        proj(&theta, &theta, 2.0, 0.1, &mut out);
        assert!(out.iter().all(|v| v.abs() < 1e-12), "{out:?}");
    }

    #[test]
    fn inward_push_is_unchanged() {
        let mut out = [0.0; 2];
        proj(&[2.0, 0.0], &[-1.0, 0.5], 2.0, 0.1, &mut out);
        assert_eq!(out, [-1.0, 0.5]);
    }

    #[test]
    fn scalar_and_renormalize() {
        assert!(proj_scalar(100.0, 5.0, 100.0, 0.1).abs() < 1e-12);
        assert_eq!(proj_scalar(100.0, -5.0, 100.0, 0.1), -5.0);
        let mut v = [3.0, 4.0];
        renormalize(&mut v, 2.5);
        assert!((v[0] - 1.5).abs() < 1e-15 && (v[1] - 2.0).abs() < 1e-15);
    }
}
