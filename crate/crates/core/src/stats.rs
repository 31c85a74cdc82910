//! Kolmogorov-Smirnov goodness-of-fit tests.

use alloc::vec::Vec;

use crate::math::{kolmogorov_sf, sqrt};
use crate::{Error, Result};

/// Asymptotic 5% critical value of `sqrt(n) D`.
pub const KS_CRIT_5: f64 = 1.3581;
/// Asymptotic 1% critical value of `sqrt(n) D`.
pub const KS_CRIT_1: f64 = 1.6276;

/// Result of a Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KsReport {
    /// Supremum distance between the distribution functions.
    pub statistic: f64,
    /// Effective sample size: `n`, or `n m / (n + m)` for two samples.
    pub effective_n: f64,
    /// 5% critical value of the statistic.
    pub critical_5: f64,
    /// 1% critical value of the statistic.
    pub critical_1: f64,
    /// Asymptotic p-value with Stephens' small-sample correction.
    pub p_value: f64,
}

impl KsReport {
    fn new(statistic: f64, effective_n: f64) -> Self {
        let rn = sqrt(effective_n);
        KsReport {
            statistic,
            effective_n,
            critical_5: KS_CRIT_5 / rn,
            critical_1: KS_CRIT_1 / rn,
            p_value: kolmogorov_sf((rn + 0.12 + 0.11 / rn) * statistic),
        }
    }

    /// Not rejected at the 5% level.
    pub fn passes_5(&self) -> bool {
        self.statistic <= self.critical_5
    }

    /// Not rejected at the 1% level.
    pub fn passes_1(&self) -> bool {
        self.statistic <= self.critical_1
    }
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite("KS sample"));
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// One-sample test of `samples` against the distribution function `cdf`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsReport::new(d, n))
}

/// Two-sample test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let (x, y) = (sorted(a)?, sorted(b)?);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsReport::new(d, n * m / (n + m)))
}
