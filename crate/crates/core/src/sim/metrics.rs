use serde::{Deserialize, Serialize};

use super::trace::SimTrace;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    pub max_err: f64,
    pub rms_err: f64,
    /// Dominant oscillation frequency of the tracking error in Hz, from its
    /// mean-removed zero crossings.
    pub osc_freq: f64,
}

/// Tracking error statistics of `y - y_des` over `[t_start, t_end]`.
pub fn tracking_metrics(trace: &SimTrace, t_start: f64) -> Result<TrackingMetrics> {
    let idx: Vec<usize> = (0..trace.len()).filter(|&i| trace.t[i] >= t_start).collect();
    if idx.len() < 2 {
        return Err(Error::EmptyWindow { t_start });
    }
    let err: Vec<f64> = idx.iter().map(|&i| trace.y[i] - trace.y_des[i]).collect();
    let window = trace.t[*idx.last().unwrap()] - trace.t[idx[0]];
    Ok(error_metrics(&err, window))
}

/// Metrics of uniformly sampled error samples spanning `window` seconds.
pub fn error_metrics(err: &[f64], window: f64) -> TrackingMetrics {
    let n = err.len() as f64;
    let max_err = err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let rms_err = (err.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let mean = err.iter().sum::<f64>() / n;
    let mut crossings = 0usize;
    let mut prev_sign = 0i8;
    for e in err {
        let d = e - mean;
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if prev_sign != 0 && sign != prev_sign {
                crossings += 1;
            }
            prev_sign = sign;
        }
    }
    let osc_freq = if window > 0.0 { crossings as f64 / (2.0 * window) } else { 0.0 };
    TrackingMetrics {
        max_err,
        rms_err,
        osc_freq,
    }
}
