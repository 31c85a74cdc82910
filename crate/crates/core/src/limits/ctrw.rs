use alloc::vec::Vec;

use rand::RngCore;

use crate::maps::builtin::example1;
use crate::maps::ShiftPeriodicMap;
use crate::math::exp;
use crate::rng::{path_rng, UnitSampler};
use crate::stats::{ks_one_sample, KsReport};
use crate::transfer::{self, cond_invariant_density, orbit_refined_breaks, ulam_on_partition, PiecewiseConstantDensity};
use crate::walk::{skew_step, SkewState};
use crate::{Error, Result};

/// Fewest pooled waiting times accepted by [`waiting_time_test`].
pub const MIN_WAITING_TIMES: usize = 100;

/// Jump rate `3 (eps + delta) / 16` of the limiting continuous-time walk.
pub fn gamma(eps: f64, delta: f64) -> f64 {
    3.0 * (eps + delta) / 16.0
}

/// Measure `l(eps) + l(delta)` of the points of `[0, 1]` that leave it in one step.
pub fn hole_measure(eps: f64, delta: f64) -> f64 {
    transfer::hole_measure(eps) + transfer::hole_measure(delta)
}

/// Starting law of the continuous-time walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CtrwInit {
    /// Ulam estimate of the invariant density of the rescaled map.
    #[default]
    Invariant,
    /// Conditionally invariant density of the map with holes.
    ConditionallyInvariant,
    /// Lebesgue measure.
    Uniform,
}

/// Bulk cells of the partition used for the invariant starting density.
pub const INIT_GRID: usize = 4000;
/// Orbit points of each spike added to that partition.
pub const INIT_ORBIT_DEPTH: usize = 30;

/// Density of the starting point for spike parameters `eps / m` and `delta / m`.
pub fn ctrw_initial_density(eps: f64, delta: f64, m: usize, init: CtrwInit) -> Result<PiecewiseConstantDensity> {
    let (e, d) = (eps / m as f64, delta / m as f64);
    match init {
        CtrwInit::Uniform => Ok(PiecewiseConstantDensity::uniform()),
        CtrwInit::ConditionallyInvariant => Ok(cond_invariant_density(e, d)?.density()),
        CtrwInit::Invariant => {
            let map = example1(e, d)?;
            Ok(ulam_on_partition(&map, orbit_refined_breaks(&map, INIT_GRID, INIT_ORBIT_DEPTH))?.density())
        }
    }
}

/// Jumps of `Y_m(t) = floor(F^{floor(m t)}(X))` up to a time horizon.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpRecord {
    /// Time scaling.
    pub m: usize,
    /// Steps `k` at which `Y` changes; the jump time is `k / m`.
    pub jump_steps: Vec<u64>,
    /// Size of each jump.
    pub jumps: Vec<i64>,
    /// Time horizon.
    pub horizon: f64,
}

impl JumpRecord {
    /// Jump times `k / m`.
    pub fn jump_times(&self) -> Vec<f64> {
        self.jump_steps.iter().map(|k| *k as f64 / self.m as f64).collect()
    }

    /// Whether every jump has size one.
    pub fn unit_jumps(&self) -> bool {
        self.jumps.iter().all(|j| j.abs() == 1)
    }

    /// Waiting times that start no later than `horizon - guard`, the first measured from 0.
    ///
    /// Gaps that start close to the horizon are dropped because long ones
    /// would be cut off, which would bias the pool toward short gaps.
    pub fn waiting_times(&self, guard: f64) -> Vec<f64> {
        let last_start = self.horizon - guard;
        let mut prev = 0.0;
        let mut out = Vec::new();
        for t in self.jump_times() {
            if prev <= last_start {
                out.push(t - prev);
            }
            prev = t;
        }
        out
    }
}

/// Iterates `map` for `floor(m horizon)` steps from a point drawn from `init` and records the jumps.
///
/// `map` is the spike map with parameters already divided by `m`.
pub fn simulate_ctrw(map: &ShiftPeriodicMap, m: usize, horizon: f64, init: &dyn UnitSampler, rng: &mut dyn RngCore) -> Result<JumpRecord> {
    if m == 0 {
        return Err(Error::param("m", "must be at least 1"));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", "must be finite and non-negative"));
    }
    let steps = (m as f64 * horizon) as u64;
    let mut s = SkewState { x: init.sample(rng), m: 0 };
    let (mut jump_steps, mut jumps) = (Vec::new(), Vec::new());
    for k in 1..=steps {
        let (next, jump) = skew_step(map, s);
        let j = jump.ok_or_else(|| Error::Condition("spike map reached a singular point".into()))?;
        if j != 0 {
            jump_steps.push(k);
            jumps.push(j);
        }
        s = next;
    }
    Ok(JumpRecord { m, jump_steps, jumps, horizon })
}

/// Runs `n_paths` walks; path `i` uses the random stream `(seed, i)`.
pub fn simulate_ctrw_paths(eps: f64, delta: f64, m: usize, horizon: f64, init: CtrwInit, n_paths: usize, seed: u64) -> Result<Vec<JumpRecord>> {
    let map = example1(eps / m as f64, delta / m as f64)?;
    let density = ctrw_initial_density(eps, delta, m, init)?;
    (0..n_paths)
        .map(|i| simulate_ctrw(&map, m, horizon, &density, &mut path_rng(seed, i as u64)))
        .collect()
}

/// Guard `min(horizon / 2, 10 / gamma)` used when pooling waiting times.
pub fn default_guard(horizon: f64, gamma: f64) -> f64 {
    (horizon / 2.0).min(10.0 / gamma)
}

/// Pools the waiting times of all records and tests them against `Exp(gamma)`.
pub fn waiting_time_test(records: &[JumpRecord], gamma: f64) -> Result<KsReport> {
    if !(gamma > 0.0) {
        return Err(Error::param("gamma", "must be positive"));
    }
    let horizon = records.iter().map(|r| r.horizon).fold(f64::INFINITY, f64::min);
    let guard = default_guard(horizon, gamma);
    let pooled: Vec<f64> = records.iter().flat_map(|r| r.waiting_times(guard)).collect();
    exponential_test(&pooled, gamma)
}

/// Kolmogorov-Smirnov test of samples against `Exp(gamma)`.
pub fn exponential_test(samples: &[f64], gamma: f64) -> Result<KsReport> {
    if samples.len() < MIN_WAITING_TIMES {
        return Err(Error::InsufficientData(alloc::format!("{} waiting times, need {MIN_WAITING_TIMES}", samples.len())));
    }
    ks_one_sample(samples, |t| if t <= 0.0 { 0.0 } else { 1.0 - exp(-gamma * t) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::log;
    use crate::rng::Uniform01;
    use rand::Rng;

    #[test]
    fn closed_forms() {
        assert!((gamma(0.01, 0.01) - 0.00375).abs() < 1e-15);
        assert_eq!(hole_measure(0.0, 0.0), 0.0);
        let m = 1e5;
        let g = gamma(0.1, 0.1);
        assert!((m * hole_measure(0.1 / m, 0.1 / m) - g).abs() / g < 1e-4);
    }

    #[test]
    fn exponential_null_calibration() {
        let mut passes = 0;
        for s in 0..40 {
            let mut rng = path_rng(100, s);
            let xs: Vec<f64> = (0..2000).map(|_| -log(1.0 - rng.random::<f64>()) / 0.2).collect();
            passes += exponential_test(&xs, 0.2).unwrap().passes_5() as usize;
        }
        assert!(passes >= 33, "{passes}");
        assert!(exponential_test(&[1.0; 10], 0.2).is_err());
    }

    #[test]
    fn no_steps_no_jumps() {
        let map = example1(0.5, 0.5).unwrap();
        let r = simulate_ctrw(&map, 1, 0.5, &Uniform01, &mut path_rng(0, 0)).unwrap();
        assert!(r.jump_steps.is_empty());
    }

    #[test]
    fn records_are_well_formed() {
        let recs = simulate_ctrw_paths(0.5, 0.5, 50, 40.0, CtrwInit::Invariant, 50, 3).unwrap();
        for r in &recs {
            assert!(r.unit_jumps());
            assert!(r.jump_steps.windows(2).all(|w| w[0] < w[1]));
            assert!(r.jump_times().iter().all(|t| *t > 0.0 && *t <= 40.0));
        }
        let n: usize = recs.iter().map(|r| r.jumps.len()).sum();
        // about gamma * horizon jumps per path
        let expect = gamma(0.5, 0.5) * 40.0 * 50.0;
        assert!((n as f64 - expect).abs() < 5.0 * expect.sqrt(), "{n} vs {expect}");
    }

    #[test]
    fn waiting_times_respect_the_guard() {
        let r = JumpRecord { m: 10, jump_steps: alloc::vec![10, 30, 80, 95], jumps: alloc::vec![1, -1, 1, 1], horizon: 10.0 };
        assert_eq!(r.waiting_times(2.0), [1.0, 2.0, 5.0, 1.5]);
        assert_eq!(r.waiting_times(5.0), [1.0, 2.0, 5.0]);
    }

    #[test]
    fn initial_densities() {
        for init in [CtrwInit::Invariant, CtrwInit::ConditionallyInvariant, CtrwInit::Uniform] {
            let d = ctrw_initial_density(0.5, 0.3, 10, init).unwrap();
            assert!((d.mass() - 1.0).abs() < 1e-12);
        }
    }
}
