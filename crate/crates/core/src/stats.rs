//! Small statistical helpers shared by estimators and tests.

use serde::{Deserialize, Serialize};

/// Count, mean and centred second moment, mergeable in any grouping
/// (Chan et al. parallel update).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        Self { n, mean, m2 }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut s = Self::default();
        for &x in xs {
            s.push(x);
        }
        s
    }

    /// Unbiased sample variance (zero for fewer than two observations).
    pub fn variance(&self) -> f64 {
        if self.n < 2 { 0.0 } else { (self.m2 / (self.n - 1) as f64).max(0.0) }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 { f64::INFINITY } else { (self.variance() / self.n as f64).sqrt() }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// One-sample Kolmogorov-Smirnov distance between the empirical law of
/// `samples` and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Pearson correlation of two equally long samples.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let (a, b) = (x[k] - mx, y[k] - my);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    sxy / (sxx * syy).sqrt()
}

/// Lag-1 autocorrelation.
pub fn lag1_autocorrelation(x: &[f64]) -> f64 {
    correlation(&x[..x.len() - 1], &x[1..])
}

/// Error-free summation helpers.
pub mod compensated_sum {
    /// Double-double accumulator built on TwoSum.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct Accumulator {
        hi: f64,
        lo: f64,
    }

    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        (s, err)
    }

    impl Accumulator {
        pub fn add(&mut self, x: f64) {
            let (s, e) = two_sum(self.hi, x);
            let (hi, lo) = two_sum(s, e + self.lo);
            self.hi = hi;
            self.lo = lo;
        }

        pub fn value(&self) -> f64 {
            self.hi + self.lo
        }

        /// `1 - sum`, evaluated before collapsing the two components.
        pub fn one_minus(&self) -> f64 {
            (1.0 - self.hi) - self.lo
        }
    }

    pub fn sum(xs: &[f64]) -> f64 {
        let mut a = Accumulator::default();
        for &x in xs {
            a.add(x);
        }
        a.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_stats_merge_matches_pooled() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let whole = RunningStats::from_slice(&xs);
        let merged = RunningStats::from_slice(&xs[..30]).merge(&RunningStats::from_slice(&xs[30..]));
        assert_eq!(whole.n, merged.n);
        assert!((whole.mean - merged.mean).abs() < 1e-14);
        assert!((whole.variance() - merged.variance()).abs() < 1e-13);
        assert_eq!(RunningStats::default().merge(&whole), whole);
    }

    #[test]
    fn ks_exact_small_case() {
        // one point at the median: D = 1/2
        assert!((ks_statistic(&[0.5], |x| x) - 0.5).abs() < 1e-15);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0], &[2.0]), 1.0);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let xs = [1.0, 1e-20, -1.0];
        assert_eq!(compensated_sum::sum(&xs), 1e-20);
    }
}
