use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Sine,
    Cosine,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalTerm {
    pub amplitude: f64,
    /// Angular frequency in rad/s.
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
    pub kind: TrigKind,
}

/// `offset + Σ amplitude · trig(frequency · t + phase)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub terms: Vec<SignalTerm>,
}

impl SignalSpec {
    pub fn constant(offset: f64) -> Self {
        SignalSpec {
            offset,
            terms: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        SignalSpec::zero().with(TrigKind::Sine, amplitude, frequency)
    }

    pub fn cosine(amplitude: f64, frequency: f64) -> Self {
        SignalSpec::zero().with(TrigKind::Cosine, amplitude, frequency)
    }

    /// Adds one zero-phase term.
    pub fn with(mut self, kind: TrigKind, amplitude: f64, frequency: f64) -> Self {
        self.terms.push(SignalTerm {
            amplitude,
            frequency,
            phase: 0.0,
            kind,
        });
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().fold(self.offset, |acc, term| {
            let arg = term.frequency * t + term.phase;
            acc + term.amplitude
                * match term.kind {
                    TrigKind::Sine => arg.sin(),
                    TrigKind::Cosine => arg.cos(),
                }
        })
    }

    /// `|offset| + Σ |amplitude|`.
    pub fn sup_bound(&self) -> f64 {
        self.offset.abs() + self.terms.iter().map(|t| t.amplitude.abs()).sum::<f64>()
    }

    /// `Σ |amplitude · frequency|`, a bound on the time derivative.
    pub fn derivative_bound(&self) -> f64 {
        self.terms.iter().map(|t| (t.amplitude * t.frequency).abs()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.offset.is_finite()
            && self
                .terms
                .iter()
                .all(|t| t.amplitude.is_finite() && t.frequency.is_finite() && t.phase.is_finite())
    }
}

/// Evaluates a vector of signals into `out`.
pub fn eval_into(specs: &[SignalSpec], t: f64, out: &mut [f64]) {
    for (o, s) in out.iter_mut().zip(specs) {
        *o = s.eval(t);
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn evaluation() {
        assert!((SignalSpec::sine(1.0, 0.5 * PI).eval(1.0) - 1.0).abs() < 1e-15);
        let theta1 = SignalSpec::constant(0.5).with(TrigKind::Cosine, 1.0, PI);
        assert_eq!(theta1.eval(0.0), 1.5);
        assert_eq!(SignalSpec::zero().eval(12.3), 0.0);
    }

    #[test]
    fn bounds() {
        let s = SignalSpec::constant(1.0)
            .with(TrigKind::Sine, 0.3, PI)
            .with(TrigKind::Cosine, 0.2, 2.0);
        assert!((s.sup_bound() - 1.5).abs() < 1e-15);
        assert!((s.derivative_bound() - (0.3 * PI + 0.4)).abs() < 1e-15);
    }

    #[test]
    fn json_shape() {
        let s: SignalSpec = serde_json::from_str(
            r#"{"offset": 0.5, "terms": [{"amplitude": 1, "frequency": 3.14, "phase": 0, "kind": "cosine"}]}"#,
        )
        .unwrap();
        assert_eq!(s.terms[0].kind, TrigKind::Cosine);
        let empty: SignalSpec = serde_json::from_str("{}").unwrap();
        assert_eq!(empty, SignalSpec::zero());
    }
}
