//! Small statistical helpers: binomial frequencies, batch-means standard
//! errors and Student-t quantiles.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Number of successes out of a number of independent trials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Frequency {
    pub hits: u64,
    pub trials: u64,
}

impl Frequency {
    pub fn new(hits: u64, trials: u64) -> Self {
        assert!(hits <= trials, "{hits} hits out of {trials} trials");
        Self { hits, trials }
    }

    pub fn p(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.hits as f64 / self.trials as f64
        }
    }

    /// Binomial standard error `sqrt(p(1−p)/n)`.
    pub fn se(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.p();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Splits `0..n` into `⌈√n⌉` contiguous batches whose sizes differ by at most one.
pub fn batch_ranges(n: usize) -> Vec<std::ops::Range<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let b = (n as f64).sqrt().ceil() as usize;
    let b = b.clamp(1, n);
    (0..b).map(|i| (i * n / b)..((i + 1) * n / b)).collect()
}

/// Standard error of the mean of per-batch statistics.
pub fn batch_se(stats: &[f64]) -> f64 {
    let b = stats.len();
    if b < 2 {
        return f64::NAN;
    }
    let mean = stats.iter().sum::<f64>() / b as f64;
    let var = stats.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

/// Pairwise sum; exact for `2^k` copies of one value.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Quantile `p` of Student's t distribution with `df` degrees of freedom.
pub fn student_t_quantile(df: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level {p} outside (0,1)")));
    }
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::InvalidParameter(format!("degrees of freedom {df}: {e}")))?;
    Ok(dist.inverse_cdf(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_quantile_reference_values() {
        assert!((student_t_quantile(7.0, 0.975).unwrap() - 2.3646).abs() < 1e-4);
        assert!((student_t_quantile(1.0, 0.975).unwrap() - 12.7062).abs() < 1e-3);
        assert!(student_t_quantile(30.0, 0.5).unwrap().abs() < 1e-12);
        assert!(student_t_quantile(5.0, 1.0).is_err());
    }

    #[test]
    fn batches_cover_everything() {
        let r = batch_ranges(10);
        assert_eq!(r.len(), 4);
        assert_eq!(r.first().unwrap().start, 0);
        assert_eq!(r.last().unwrap().end, 10);
        assert!(r.windows(2).all(|w| w[0].end == w[1].start));
        assert_eq!(batch_ranges(1).len(), 1);
    }

    #[test]
    fn pairwise_sum_of_constants_is_exact() {
        let xs = vec![0.1; 1 << 10];
        assert_eq!(pairwise_sum(&xs) / (1 << 10) as f64, 0.1);
    }

    #[test]
    fn frequency_se() {
        let f = Frequency::new(25, 100);
        assert_eq!(f.p(), 0.25);
        assert!((f.se() - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }
}
