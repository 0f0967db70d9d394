//! Order-fixed compensated reductions.

/// Kahan–Babuška (Neumaier) compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator) over sqrt(n). NaN for a
    /// single sample.
    pub standard_error: f64,
}

/// Two-pass mean and standard error, reduced in slice order.
pub fn mean_estimate(samples: &[f64]) -> MeanEstimate {
    let n = samples.len();
    if n == 0 {
        return MeanEstimate {
            mean: f64::NAN,
            standard_error: f64::NAN,
        };
    }
    let mean = samples.iter().copied().collect::<KahanSum>().total() / n as f64;
    if n == 1 {
        return MeanEstimate {
            mean,
            standard_error: f64::NAN,
        };
    }
    let ss = samples
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .collect::<KahanSum>()
        .total();
    let std = (ss / (n - 1) as f64).sqrt();
    MeanEstimate {
        mean,
        standard_error: std / (n as f64).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.total(), 1000.0);
    }

    #[test]
    fn mean_and_error() {
        let est = mean_estimate(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(est.mean, 2.5);
        let std = (5.0f64 / 3.0).sqrt();
        assert!((est.standard_error - std / 2.0).abs() < 1e-15);

        let constant = mean_estimate(&[0.25; 10]);
        assert_eq!(constant.mean, 0.25);
        assert_eq!(constant.standard_error, 0.0);

        assert!(mean_estimate(&[1.0]).standard_error.is_nan());
    }
}
