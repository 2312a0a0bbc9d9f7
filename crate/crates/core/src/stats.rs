//! Streaming moments and the Monte Carlo estimate record.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent under std
use num_traits::Float;

/// Running mean and centred second moment (Welford), mergeable (Chan et al.).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.n = n;
    }

    /// Merges in index order.
    pub fn merge_all<'a>(parts: impl IntoIterator<Item = &'a Moments>) -> Moments {
        let mut acc = Moments::new();
        for p in parts {
            acc.merge(p);
        }
        acc
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// How censoring affects the reported mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bias {
    /// No censoring effect.
    None,
    /// Censored paths were dropped; for nonnegative increasing functionals
    /// of τ the mean is biased downward.
    CensoredDropped,
    /// Censored paths contributed their truncated value; the mean is only a
    /// lower bound of the target.
    LowerBound,
    /// Truncation error bounded in absolute value by the given amount.
    Bounded(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator) over `√n`.
    pub stderr: f64,
    pub n: usize,
    pub censored_fraction: f64,
    pub bias: Bias,
}

impl MCEstimate {
    pub fn from_moments(m: &Moments, censored_fraction: f64, bias: Bias) -> Self {
        Self {
            mean: m.mean,
            stderr: m.stderr(),
            n: m.n,
            censored_fraction,
            bias,
        }
    }

    pub fn exact(value: f64, n: usize) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
            n,
            censored_fraction: 0.0,
            bias: Bias::None,
        }
    }

    pub fn is_lower_bound(&self) -> bool {
        self.bias == Bias::LowerBound
    }

    /// `|mean − target| ≤ k·stderr + abs_tol`.
    pub fn agrees_with(&self, target: f64, k: f64, abs_tol: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + abs_tol
    }
}

/// Batch-means standard error of the mean of `xs`, with `n_batches`
/// contiguous batches (the tail remainder joins the last batch).
pub fn batch_means_stderr(xs: &[f64], n_batches: usize) -> f64 {
    let nb = n_batches.min(xs.len());
    if nb < 2 {
        return 0.0;
    }
    let size = xs.len() / nb;
    let mut m = Moments::new();
    for b in 0..nb {
        let lo = b * size;
        let hi = if b + 1 == nb { xs.len() } else { lo + size };
        let s: f64 = xs[lo..hi].iter().sum();
        m.push(s / (hi - lo) as f64);
    }
    m.stderr()
}

/// Empirical quantile by linear interpolation of the sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

pub(crate) fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_samples_are_exact() {
        let mut a = Moments::new();
        let mut b = Moments::new();
        for _ in 0..7 {
            a.push(0.3);
        }
        for _ in 0..5 {
            b.push(0.3);
        }
        a.merge(&b);
        assert_eq!(a.mean, 0.3);
        assert_eq!(a.stderr(), 0.0);
        assert_eq!(a.n, 12);
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 8.0, 0.25, 7.0];
        let mut whole = Moments::new();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = Moments::new();
        let mut right = Moments::new();
        xs[..3].iter().for_each(|&x| left.push(x));
        xs[3..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert!((left.mean - whole.mean).abs() < 1e-14);
        assert!((left.variance() - whole.variance()).abs() < 1e-12);
        let mean = xs.iter().sum::<f64>() / 7.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 6.0;
        assert!((whole.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn quantiles_interpolate() {
        let s = sorted(vec![3.0, 1.0, 2.0, 4.0]);
        assert_eq!(quantile(&s, 0.0), Some(1.0));
        assert_eq!(quantile(&s, 1.0), Some(4.0));
        assert_eq!(quantile(&s, 0.5), Some(2.5));
        assert_eq!(quantile(&[], 0.5), None);
    }
}
