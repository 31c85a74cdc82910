use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::stable::StableParams;
use crate::maps::{ExtendedReal, ShiftPeriodicMap};
use crate::math::{log, pow, sin, sqrt, tgamma, PI};
use crate::rng::UnitSampler;
use crate::walk::{skew_step, SkewState};
use crate::{Error, Result};

/// Paths hitting a singular point are redrawn at most this many times in a row.
pub const MAX_RESAMPLES: usize = 1000;

/// Row of the scaling table selected by the tail exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    /// `0 < kappa < 1`.
    Below1,
    /// `kappa = 1`.
    One,
    /// `1 < kappa < 2`.
    Between1And2,
    /// `kappa = 2`.
    Two,
    /// `kappa > 2`.
    Above2,
}

impl Regime {
    /// The row for `kappa > 0`.
    pub fn of(kappa: f64) -> Regime {
        if kappa < 1.0 {
            Regime::Below1
        } else if kappa == 1.0 {
            Regime::One
        } else if kappa < 2.0 {
            Regime::Between1And2
        } else if kappa == 2.0 {
            Regime::Two
        } else {
            Regime::Above2
        }
    }
}

/// Centering `a_n` and scaling `b_n` for the increments of a walk with power tails.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingPlan {
    /// Tail exponent.
    pub kappa: f64,
    /// Upper tail constant.
    pub c_plus: f64,
    /// Lower tail constant.
    pub c_minus: f64,
    /// Mean increment, used when `kappa > 1`.
    pub mean: Option<f64>,
    /// Increment variance, used when `kappa > 2`.
    pub variance: Option<f64>,
    /// Selected row.
    pub regime: Regime,
}

/// Builds the scaling plan and checks that the moments the row needs are given.
pub fn scaling_plan(kappa: f64, c_plus: f64, c_minus: f64, mean: Option<f64>, variance: Option<f64>) -> Result<ScalingPlan> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::param("kappa", alloc::format!("{kappa} must be positive")));
    }
    if !(c_plus >= 0.0 && c_minus >= 0.0 && c_plus + c_minus > 0.0) {
        return Err(Error::param("c", "tail constants must be non-negative and not both zero"));
    }
    let regime = Regime::of(kappa);
    if regime == Regime::One && (c_plus - c_minus).abs() > 1e-12 * (c_plus + c_minus) {
        return Err(Error::param("c", "kappa = 1 requires c_plus = c_minus"));
    }
    if kappa > 1.0 && mean.is_none() {
        return Err(Error::param("mean", "required when kappa > 1"));
    }
    if kappa > 2.0 && !variance.is_some_and(|v| v > 0.0) {
        return Err(Error::param("variance", "a positive variance is required when kappa > 2"));
    }
    Ok(ScalingPlan { kappa, c_plus, c_minus, mean, variance, regime })
}

impl ScalingPlan {
    /// `alpha = min(kappa, 2)`.
    pub fn alpha(&self) -> f64 {
        self.kappa.min(2.0)
    }

    /// `beta = (c_plus - c_minus) / (c_plus + c_minus)`.
    pub fn beta(&self) -> f64 {
        (self.c_plus - self.c_minus) / (self.c_plus + self.c_minus)
    }

    /// Law of the limit at time one.
    pub fn limit(&self) -> StableParams {
        let beta = if self.regime == Regime::One { 0.0 } else { self.beta() };
        StableParams::new(self.alpha(), beta).expect("plan parameters are admissible")
    }

    fn c_sum(&self) -> f64 {
        self.c_plus + self.c_minus
    }

    /// Centering constant.
    pub fn a_n(&self, n: f64) -> f64 {
        match self.regime {
            Regime::Below1 => 0.0,
            Regime::One => self.beta() * self.c_sum() * n * log(n),
            _ => n * self.mean.unwrap_or(0.0),
        }
    }

    /// Scaling constant.
    pub fn b_n(&self, n: f64) -> f64 {
        let a = self.alpha();
        match self.regime {
            Regime::Below1 | Regime::Between1And2 => pow(PI * self.c_sum() / (2.0 * tgamma(a) * sin(a * PI / 2.0)) * n, 1.0 / a),
            Regime::One => PI / 2.0 * self.c_sum() * n,
            Regime::Two => sqrt(self.c_sum() * n * log(n)),
            Regime::Above2 => sqrt(self.variance.unwrap_or(0.0) / 2.0 * n),
        }
    }

    /// `V(t) = (Y - a_n t) / b_n` for a walk position `y` at time `t`.
    pub fn rescale(&self, n: f64, t: f64, y: f64) -> f64 {
        (y - self.a_n(n) * t) / self.b_n(n)
    }
}

/// A rescaled path sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VnPath {
    /// Times.
    pub t: Vec<f64>,
    /// `V^(n)(t)`.
    pub v: Vec<f64>,
    /// Paths discarded after a singular hit before this one was kept.
    pub resampled: usize,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("t_grid", "must be a non-empty increasing list of non-negative times"));
    }
    Ok(())
}

/// Rescaled walk `V^(n)(t) = (Y_floor(nt) - a_n t) / b_n` by direct iteration of the map.
///
/// The start is drawn from `init`. A path reaching a singular point is drawn
/// again and counted in [`VnPath::resampled`].
pub fn simulate_vn(map: &ShiftPeriodicMap, init: &dyn UnitSampler, n: usize, t_grid: &[f64], plan: &ScalingPlan, rng: &mut dyn RngCore) -> Result<VnPath> {
    check_grid(t_grid)?;
    let nf = n as f64;
    let marks: Vec<usize> = t_grid.iter().map(|t| (nf * t) as usize).collect();
    let steps = *marks.last().unwrap();
    'retry: for resampled in 0..=MAX_RESAMPLES {
        let mut s = SkewState { x: init.sample(rng), m: 0 };
        let mut v = Vec::with_capacity(t_grid.len());
        let mut next = 0;
        for k in 0..=steps {
            while next < marks.len() && marks[next] == k {
                v.push(plan.rescale(nf, t_grid[next], s.m as f64));
                next += 1;
            }
            if k == steps {
                break;
            }
            let (ns, jump) = skew_step(map, s);
            if jump.is_none() {
                continue 'retry;
            }
            s = ns;
        }
        return Ok(VnPath { t: t_grid.to_vec(), v, resampled });
    }
    Err(Error::Condition(alloc::format!("{MAX_RESAMPLES} consecutive paths hit a singular point")))
}

/// One increment `floor(F(V))` with `V` uniform on `[0, 1)`.
///
/// For maps with integer spikes the increments of the walk started from the
/// invariant law are independent with exactly this distribution, so summing
/// such draws realizes the walk's law without iterating the map.
pub fn sample_increment(map: &ShiftPeriodicMap, rng: &mut dyn RngCore) -> f64 {
    loop {
        if let ExtendedReal::Finite(y) = map.eval_unit(rng.random::<f64>()) {
            return crate::math::floor(y);
        }
    }
}

/// Rescaled walk built from independent increments with the law of `floor(F(U))`.
pub fn simulate_vn_increments(map: &ShiftPeriodicMap, n: usize, t_grid: &[f64], plan: &ScalingPlan, rng: &mut dyn RngCore) -> Result<VnPath> {
    check_grid(t_grid)?;
    let nf = n as f64;
    let mut v = Vec::with_capacity(t_grid.len());
    let (mut y, mut k) = (0.0f64, 0usize);
    for &t in t_grid {
        let mark = (nf * t) as usize;
        while k < mark {
            y += sample_increment(map, rng);
            k += 1;
        }
        v.push(plan.rescale(nf, t, y));
    }
    Ok(VnPath { t: t_grid.to_vec(), v, resampled: 0 })
}
