use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative magnitude below which a coefficient produced by adding two
/// nearly opposite terms is treated as exact cancellation.
pub const CANCELLATION_TOL: f64 = 1e-12;

/// Real polynomial with coefficients in ascending degree order.
///
/// Trailing zeros are always trimmed; the zero polynomial is `[0.0]`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The polynomial `s`.
    pub fn s() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_real_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Polynomial::constant(1.0), |acc, &r| {
            &acc * &Polynomial::new(vec![-r, 1.0])
        })
    }

    /// Monic polynomial with the given roots; non-real roots must come in
    /// conjugate pairs, the imaginary residue of the product is dropped.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        Polynomial::new(c.into_iter().map(|z| z.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Coefficient of `s^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, factor: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Multiplies by `s^n`.
    pub fn shift(&self, n: usize) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![0.0; n];
        c.extend_from_slice(&self.coeffs);
        Polynomial::new(c)
    }

    /// Drops trailing coefficients with magnitude at most `rel` times the
    /// largest coefficient magnitude.
    pub fn trim_relative(&self, rel: f64) -> Polynomial {
        let cutoff = rel * self.max_abs_coeff();
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c[c.len() - 1].abs() <= cutoff {
            c.pop();
        }
        Polynomial::new(c)
    }

    /// Divides every coefficient by the leading coefficient.
    pub fn monic(&self) -> Polynomial {
        let lead = self.leading();
        assert!(lead != 0.0, "the zero polynomial has no monic form");
        Polynomial::new(self.coeffs.iter().map(|c| c / lead).collect())
    }

    fn combine(&self, other: &Polynomial, sign: f64) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let c = (0..len)
            .map(|i| {
                let a = self.coeff(i);
                let b = sign * other.coeff(i);
                let sum = a + b;
                if sum.abs() <= CANCELLATION_TOL * a.abs().max(b.abs()) {
                    0.0
                } else {
                    sum
                }
            })
            .collect();
        Polynomial::new(c)
    }
}

impl From<Vec<f64>> for Polynomial {
    fn from(c: Vec<f64>) -> Self {
        Polynomial::new(c)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Polynomial").field(&self.coeffs).finish()
    }
}

// Sums cancel coefficients that vanish to rounding level relative to their
// summands; products of Padé polynomials otherwise leave spurious residue in
// the highest powers.
impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}
