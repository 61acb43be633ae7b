use crate::error::{Error, Result};
use crate::linalg::Polynomial;

use super::rational::RationalTf;

/// Order of the delay approximant; numerator and denominator are both quintic.
pub const PADE_ORDER: usize = 5;

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Coefficients `c_i = (2m-i)! m! / ((2m)! i! (m-i)!)` for `m = 5` as reduced
/// fractions `(numerator, denominator)`.
pub fn pade_coefficients_exact() -> [(u64, u64); PADE_ORDER + 1] {
    let m = PADE_ORDER as u64;
    std::array::from_fn(|i| {
        let i = i as u64;
        let num = factorial(2 * m - i) * factorial(m);
        let den = factorial(2 * m) * factorial(i) * factorial(m - i);
        let g = gcd(num, den);
        (num / g, den / g)
    })
}

pub fn pade_coefficients() -> [f64; PADE_ORDER + 1] {
    pade_coefficients_exact().map(|(n, d)| n as f64 / d as f64)
}

/// Unnormalized numerator and denominator of the (5,5) approximant of
/// `e^{-tau s}`: `sum (-1)^i c_i tau^i s^i` over `sum c_j tau^j s^j`.
pub fn pade_polynomials(tau: f64) -> (Polynomial, Polynomial) {
    let c = pade_coefficients();
    let mut num = Vec::with_capacity(PADE_ORDER + 1);
    let mut den = Vec::with_capacity(PADE_ORDER + 1);
    let mut tau_pow = 1.0;
    for (i, ci) in c.iter().enumerate() {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        num.push(sign * ci * tau_pow);
        den.push(ci * tau_pow);
        tau_pow *= tau;
    }
    (Polynomial::new(num), Polynomial::new(den))
}

/// Rational approximation of a pure delay. `tau = 0` gives the constant 1.
pub fn pade_delay(tau: f64) -> Result<RationalTf> {
    check_delay("tau", tau)?;
    let (num, den) = pade_polynomials(tau);
    RationalTf::new(num, den)
}

pub(crate) fn check_delay(arg: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::invalid(arg, format!("delay must be finite and >= 0, got {value}")));
    }
    Ok(())
}
