use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_hurwitz, poly_roots, Polynomial};

/// Scalar rational transfer function `num(s) / den(s)` with monic denominator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalTf {
    num: Polynomial,
    den: Polynomial,
}

impl RationalTf {
    /// Builds `num / den`, rescaling both so the denominator is monic.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid("den", "denominator is identically zero"));
        }
        let lead = den.leading();
        Ok(RationalTf {
            num: num.scale(1.0 / lead),
            den: den.monic(),
        })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    pub fn zero() -> Self {
        RationalTf {
            num: Polynomial::zero(),
            den: Polynomial::constant(1.0),
        }
    }

    pub fn constant(c: f64) -> Self {
        RationalTf {
            num: Polynomial::constant(c),
            den: Polynomial::constant(1.0),
        }
    }

    /// First-order low-pass `k / (s + k)`.
    pub fn low_pass(k: f64) -> Self {
        RationalTf {
            num: Polynomial::constant(k),
            den: Polynomial::new(vec![k, 1.0]),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    pub fn dc_gain(&self) -> f64 {
        self.num.coeff(0) / self.den.coeff(0)
    }

    /// Value at `s -> infinity` of a proper transfer function.
    pub fn feedthrough(&self) -> f64 {
        if !self.num.is_zero() && self.num.degree() == self.den.degree() {
            self.num.leading()
        } else {
            0.0
        }
    }

    /// `(num - D den) / den` where `D` is the feedthrough.
    pub fn strictly_proper_part(&self) -> Result<RationalTf> {
        if !self.is_proper() {
            return Err(Error::ImproperTf {
                num: self.num.degree(),
                den: self.den.degree(),
            });
        }
        let d = self.feedthrough();
        let mut rest = (&self.num - &self.den.scale(d)).coeffs().to_vec();
        rest.truncate(self.den.degree().max(1));
        Ok(RationalTf {
            num: Polynomial::new(rest),
            den: self.den.clone(),
        })
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        if self.den.degree() == 0 {
            return Ok(Vec::new());
        }
        poly_roots(&self.den)
    }

    /// Hurwitz test of the denominator (constant denominators are stable).
    pub fn is_stable(&self) -> Result<bool> {
        if self.den.degree() == 0 {
            return Ok(true);
        }
        is_hurwitz(&self.den)
    }

    pub fn mul(&self, other: &RationalTf) -> RationalTf {
        RationalTf {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
    }

    pub fn add(&self, other: &RationalTf) -> RationalTf {
        if self.den == other.den {
            return RationalTf {
                num: &self.num + &other.num,
                den: self.den.clone(),
            };
        }
        RationalTf {
            num: &(&self.num * &other.den) + &(&other.num * &self.den),
            den: &self.den * &other.den,
        }
    }

    pub fn scale(&self, factor: f64) -> RationalTf {
        RationalTf {
            num: self.num.scale(factor),
            den: self.den.clone(),
        }
    }

    /// Multiplies by `s`.
    pub fn times_s(&self) -> RationalTf {
        RationalTf {
            num: self.num.shift(1),
            den: self.den.clone(),
        }
    }
}

/// Column of scalar transfer functions (one per output component).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalTfVector {
    entries: Vec<RationalTf>,
}

impl RationalTfVector {
    pub fn new(entries: Vec<RationalTf>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("entries", "transfer-function vector is empty"));
        }
        Ok(RationalTfVector { entries })
    }

    pub fn entries(&self) -> &[RationalTf] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RationalTf> {
        self.entries.iter()
    }

    pub fn eval(&self, s: Complex64) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.eval(s)).collect()
    }

    /// Multiplies every entry by the same scalar transfer function.
    pub fn times(&self, tf: &RationalTf) -> RationalTfVector {
        RationalTfVector {
            entries: self.entries.iter().map(|e| e.mul(tf)).collect(),
        }
    }
}

impl std::ops::Index<usize> for RationalTfVector {
    type Output = RationalTf;

    fn index(&self, i: usize) -> &RationalTf {
        &self.entries[i]
    }
}
