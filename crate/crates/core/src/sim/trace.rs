use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled closed-loop trajectories.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub x_hat: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    pub theta_hat: Vec<Vec<f64>>,
    pub sigma_hat: Vec<f64>,
    pub y: Vec<f64>,
    pub y_des: Vec<f64>,
    pub x_ref: Option<Vec<Vec<f64>>>,
    pub u_ref: Option<Vec<f64>>,
    pub y_ref: Option<Vec<f64>>,
    /// Set when `‖x‖_∞` left the divergence threshold; the trace stops at
    /// the last finite sample.
    pub diverged: bool,
    pub truncation_index: Option<usize>,
}

impl SimTrace {
    pub(crate) fn with_capacity(_n: usize, samples: usize, with_ref: bool) -> Self {
        fn v<T>(samples: usize) -> Vec<T> {
            Vec::with_capacity(samples)
        }
        SimTrace {
            t: v(samples),
            x: v(samples),
            x_hat: v(samples),
            u: v(samples),
            theta_hat: v(samples),
            sigma_hat: v(samples),
            y: v(samples),
            y_des: v(samples),
            x_ref: with_ref.then(|| v(samples)),
            u_ref: with_ref.then(|| v(samples)),
            y_ref: with_ref.then(|| v(samples)),
            diverged: false,
            truncation_index: None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn push_sample(
        &mut self,
        t: f64,
        x: &[f64],
        x_hat: &[f64],
        u: f64,
        theta_hat: &[f64],
        sigma_hat: f64,
        y: f64,
        y_des: f64,
        reference: Option<(&[f64], f64, f64)>,
    ) {
        self.t.push(t);
        self.x.push(x.to_vec());
        self.x_hat.push(x_hat.to_vec());
        self.u.push(u);
        self.theta_hat.push(theta_hat.to_vec());
        self.sigma_hat.push(sigma_hat);
        self.y.push(y);
        self.y_des.push(y_des);
        if let Some((xr, ur, yr)) = reference {
            self.x_ref.get_or_insert_with(Vec::new).push(xr.to_vec());
            self.u_ref.get_or_insert_with(Vec::new).push(ur);
            self.y_ref.get_or_insert_with(Vec::new).push(yr);
        }
    }

    pub(crate) fn mark_diverged(&mut self) {
        self.diverged = true;
        self.truncation_index = Some(self.t.len());
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn order(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    /// `x̃ = x̂ - x` per sample.
    pub fn x_tilde(&self) -> Vec<Vec<f64>> {
        self.x
            .iter()
            .zip(&self.x_hat)
            .map(|(x, xh)| xh.iter().zip(x).map(|(a, b)| a - b).collect())
            .collect()
    }

    /// `max_t ‖x̃(t)‖_∞`.
    pub fn sup_x_tilde(&self) -> f64 {
        sup_inf_norm(self.x_tilde().iter().map(Vec::as_slice))
    }

    /// `max_t ‖x(t)‖_∞`.
    pub fn sup_x(&self) -> f64 {
        sup_inf_norm(self.x.iter().map(Vec::as_slice))
    }

    /// `max_t ‖x_ref(t) - x(t)‖_∞`, when the reference system was simulated.
    pub fn sup_ref_deviation(&self) -> Option<f64> {
        let xr = self.x_ref.as_ref()?;
        Some(
            xr.iter()
                .zip(&self.x)
                .map(|(a, b)| a.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs())))
                .fold(0.0, f64::max),
        )
    }

    /// Largest `‖θ̂(t)‖_2` over the samples.
    pub fn max_theta_hat_norm(&self) -> f64 {
        self.theta_hat
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    fn header(&self) -> Vec<String> {
        let n = self.order();
        let mut h = vec!["t".to_string()];
        h.extend((1..=n).map(|i| format!("x{i}")));
        h.extend((1..=n).map(|i| format!("xhat{i}")));
        h.push("u".into());
        h.extend((1..=n).map(|i| format!("thetahat{i}")));
        h.push("sigmahat".into());
        h.push("y".into());
        h.push("ydes".into());
        if self.x_ref.is_some() {
            h.extend((1..=n).map(|i| format!("xref{i}")));
            h.push("yref".into());
            h.push("uref".into());
        }
        h
    }

    /// Writes one row per sample with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header().join(","))?;
        let mut row = Vec::new();
        for i in 0..self.len() {
            row.clear();
            row.push(self.t[i]);
            row.extend_from_slice(&self.x[i]);
            row.extend_from_slice(&self.x_hat[i]);
            row.push(self.u[i]);
            row.extend_from_slice(&self.theta_hat[i]);
            row.push(self.sigma_hat[i]);
            row.push(self.y[i]);
            row.push(self.y_des[i]);
            if let (Some(xr), Some(yr), Some(ur)) = (&self.x_ref, &self.y_ref, &self.u_ref) {
                row.extend_from_slice(&xr[i]);
                row.push(yr[i]);
                row.push(ur[i]);
            }
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Parses a trace written by [`SimTrace::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty trace file".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let cols: Vec<&str> = header.split(',').collect();
        let n = cols.iter().filter(|c| c.starts_with('x') && c[1..].parse::<usize>().is_ok()).count();
        let with_ref = cols.contains(&"yref");
        let expected = 3 * n + 5 + if with_ref { n + 2 } else { 0 };
        if n == 0 || cols.len() != expected {
            return Err(Error::Parse(format!("unexpected trace header `{header}`")));
        }
        let mut trace = SimTrace::with_capacity(n, 0, with_ref);
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            if v.len() != expected {
                return Err(Error::Parse(format!("line {}: expected {expected} fields", lineno + 2)));
            }
            let mut at = 1;
            let mut take = |k: usize| {
                let s = &v[at..at + k];
                at += k;
                s
            };
            let x = take(n);
            let xh = take(n);
            let u = take(1)[0];
            let th = take(n);
            let sh = take(1)[0];
            let y = take(1)[0];
            let yd = take(1)[0];
            let reference = if with_ref {
                let xr = take(n);
                let yr = take(1)[0];
                let ur = take(1)[0];
                Some((xr, ur, yr))
            } else {
                None
            };
            trace.push_sample(v[0], x, xh, u, th, sh, y, yd, reference);
        }
        Ok(trace)
    }
}

fn sup_inf_norm<'a>(rows: impl Iterator<Item = &'a [f64]>) -> f64 {
    rows.map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0, f64::max)
}

/// Sampled reference-system trajectories.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrace {
    pub t: Vec<f64>,
    pub x_ref: Vec<Vec<f64>>,
    pub u_ref: Vec<f64>,
    pub y_ref: Vec<f64>,
    pub diverged: bool,
}

impl ReferenceTrace {
    pub(crate) fn push(&mut self, t: f64, x: &[f64], u: f64, y: f64) {
        self.t.push(t);
        self.x_ref.push(x.to_vec());
        self.u_ref.push(u);
        self.y_ref.push(y);
    }

    /// `max_t ‖x_ref(t)‖_∞`.
    pub fn sup_x(&self) -> f64 {
        sup_inf_norm(self.x_ref.iter().map(Vec::as_slice))
    }
}

/// Sampled desired-system trajectories.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DesiredTrace {
    pub t: Vec<f64>,
    pub x_des: Vec<Vec<f64>>,
    pub y_des: Vec<f64>,
}

impl DesiredTrace {
    pub(crate) fn push(&mut self, t: f64, x: &[f64], y: f64) {
        self.t.push(t);
        self.x_des.push(x.to_vec());
        self.y_des.push(y);
    }
}
