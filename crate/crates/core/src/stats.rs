//! Sample summaries for sweeps and acceptance checks.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (Bessel-corrected); 0 for fewer than 2 values.
    pub sd: f64,
    pub sem: f64,
    pub min: f64,
    pub max: f64,
    pub p50: f64,
    pub p95: f64,
}

impl Summary {
    /// `None` on an empty sample.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Summary {
            count: n,
            mean,
            sd,
            sem: sd / (n as f64).sqrt(),
            min: sorted[0],
            max: sorted[n - 1],
            p50: percentile(&sorted, 50.0),
            p95: percentile(&sorted, 95.0),
        })
    }

    pub fn of_counts(values: impl IntoIterator<Item = u64>) -> Option<Summary> {
        let v: Vec<f64> = values.into_iter().map(|x| x as f64).collect();
        Summary::of(&v)
    }

    /// `mean + 2·sem`, the upper end used against bounds on expectations.
    pub fn upper(&self) -> f64 {
        self.mean + 2.0 * self.sem
    }

    pub fn lower(&self) -> f64 {
        self.mean - 2.0 * self.sem
    }
}

/// Nearest-rank percentile of an ascending, non-empty slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_sample() {
        let s = Summary::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        // squared deviations sum to 32, over 7
        assert!((s.sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert!((s.sem - s.sd / 8f64.sqrt()).abs() < 1e-12);
        assert_eq!((s.min, s.max, s.p50, s.p95), (2.0, 9.0, 4.0, 9.0));
    }

    #[test]
    fn singleton_and_empty() {
        assert!(Summary::of(&[]).is_none());
        let s = Summary::of_counts([3]).unwrap();
        assert_eq!((s.mean, s.sd, s.sem, s.p95), (3.0, 0.0, 0.0, 3.0));
    }

    #[test]
    fn nearest_rank() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(percentile(&v, 95.0), 19.0);
        assert_eq!(percentile(&v, 50.0), 10.0);
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 100.0), 20.0);
    }
}
