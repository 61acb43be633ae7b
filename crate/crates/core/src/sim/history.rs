use std::collections::VecDeque;

/// Past samples of a scalar signal with zero pre-history.
///
/// Lookups between samples interpolate linearly; lookups past the newest
/// sample extrapolate from the last two samples, which is how stage times of
/// the current integration step see delays shorter than the step.
#[derive(Clone, Debug)]
pub struct HistoryBuffer {
    samples: VecDeque<(f64, f64)>,
    span: f64,
}

impl HistoryBuffer {
    /// Keeps at least `span` seconds of history behind the newest sample.
    pub fn new(span: f64, step: f64) -> Self {
        let capacity = (span / step).ceil() as usize + 8;
        HistoryBuffer {
            samples: VecDeque::with_capacity(capacity),
            span,
        }
    }

    /// Appends a sample; timestamps must increase strictly.
    pub fn push(&mut self, t: f64, value: f64) {
        debug_assert!(self.samples.back().map_or(true, |&(last, _)| t > last));
        self.samples.push_back((t, value));
        // Keep one sample older than the span so interpolation is bracketed.
        while self.samples.len() > 2 && self.samples[1].0 < t - self.span {
            self.samples.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn lookup(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.samples.len();
        match n {
            0 => 0.0,
            1 => self.samples[0].1,
            _ => {
                let idx = self.samples.partition_point(|&(ts, _)| ts <= t);
                let (lo, hi) = if idx == 0 {
                    (0, 1)
                } else if idx >= n {
                    (n - 2, n - 1)
                } else {
                    (idx - 1, idx)
                };
                let (t0, v0) = self.samples[lo];
                let (t1, v1) = self.samples[hi];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_prehistory() {
        let mut h = HistoryBuffer::new(0.1, 0.01);
        assert_eq!(h.lookup(0.5), 0.0);
        h.push(0.0, 0.0);
        h.push(0.01, 1.0);
        assert_eq!(h.lookup(-0.3), 0.0);
        assert_eq!(h.lookup(0.0), 0.0);
    }

    #[test]
    fn interpolation_and_extrapolation() {
        let mut h = HistoryBuffer::new(1.0, 0.5);
        for i in 0..=4 {
            let t = i as f64 * 0.5;
            h.push(t, 2.0 * t);
        }
        assert!((h.lookup(0.75) - 1.5).abs() < 1e-15);
        assert!((h.lookup(2.25) - 4.5).abs() < 1e-15);
    }

    #[test]
    fn old_samples_are_dropped() {
        let mut h = HistoryBuffer::new(0.1, 0.01);
        for i in 0..1000 {
            h.push(i as f64 * 0.01, i as f64);
        }
        assert!(h.len() <= 13);
        assert!((h.lookup(9.99 - 0.1) - 989.0).abs() < 1e-9);
    }
}
