//! Streaming, mergeable moment accumulators and small statistical helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// Raw power sums `sum x^m` for `m = 0..=8`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerSums {
    sums: [f64; 9],
}

impl PowerSums {
    pub const MAX_POWER: usize = 8;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let mut p = 1.0;
        for s in self.sums.iter_mut() {
            *s += p;
            p *= x;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.sums.iter_mut().zip(other.sums.iter()) {
            *a += b;
        }
    }

    pub fn count(&self) -> f64 {
        self.sums[0]
    }

    /// Empirical raw moment `mean(x^m)`.
    pub fn raw_moment(&self, m: usize) -> f64 {
        assert!(m <= Self::MAX_POWER);
        self.sums[m] / self.sums[0]
    }

    /// Standard error of `raw_moment(m)`; needs `2m <= 8`.
    pub fn raw_moment_std_error(&self, m: usize) -> f64 {
        assert!(2 * m <= Self::MAX_POWER);
        let n = self.count();
        let var = (self.raw_moment(2 * m) - self.raw_moment(m).powi(2)).max(0.0);
        (var / (n - 1.0).max(1.0)).sqrt()
    }
}

impl FromIterator<f64> for PowerSums {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Central moments up to order four, updated with Pébay's pairwise formulas.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CentralMoments {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl CentralMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let single = CentralMoments { n: 1.0, mean: x, ..Self::default() };
        self.merge(&single);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n, other.n);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d_n = delta / n;
        let d_n2 = d_n * d_n;
        let m2 = self.m2 + other.m2 + delta * d_n * na * nb;
        let m3 = self.m3 + other.m3 + delta * d_n2 * na * nb * (na - nb) + 3.0 * d_n * (na * other.m2 - nb * self.m2);
        let m4 = self.m4
            + other.m4
            + delta * d_n2 * d_n * na * nb * (na * na - na * nb + nb * nb)
            + 6.0 * d_n2 * (na * na * other.m2 + nb * nb * self.m2)
            + 4.0 * d_n * (na * other.m3 - nb * self.m3);
        *self = CentralMoments { n, mean: self.mean + d_n * nb, m2, m3, m4 };
    }

    pub fn count(&self) -> f64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        self.m2 / (self.n - 1.0)
    }

    pub fn mean_std_error(&self) -> f64 {
        (self.variance() / self.n).sqrt()
    }

    /// Standard error of [`Self::variance`] from the fourth central moment.
    pub fn variance_std_error(&self) -> f64 {
        let n = self.n;
        if n < 4.0 {
            return f64::INFINITY;
        }
        let mu4 = self.m4 / n;
        let s2 = self.variance();
        let var = (mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n;
        var.max(0.0).sqrt()
    }
}

impl FromIterator<f64> for CentralMoments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Pearson chi-square statistic and its upper-tail p-value.
pub fn chi_square_test(observed: &[u64], expected: &[f64]) -> Result<(f64, f64)> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(Error::InvalidArgument("chi-square test needs matching bins, at least two".into()));
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((stat, dist.sf(stat)))
}
