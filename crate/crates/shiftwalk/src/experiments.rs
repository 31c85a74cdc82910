//! Experiments behind the subcommands. Each returns a serializable report and
//! leaves writing to the caller.

use serde::Serialize;
use shiftwalk_core::conjugacy::{build_h, conjugacy_residual, invariant_sampler};
use shiftwalk_core::limits::{
    cauchy_cdf, default_guard, gamma, gaussian_limit_cdf, hole_measure, scaling_plan, simulate_vn, simulate_vn_increments, stable_cdf,
    waiting_time_test, CtrwInit, JumpRecord, ScalingPlan, StableParams,
};
use shiftwalk_core::maps::builtin::{example1, example2_constant};
use shiftwalk_core::maps::{validate, ValidationReport};
use shiftwalk_core::rng::Uniform01;
use shiftwalk_core::stats::{ks_one_sample, ks_two_sample, KsReport};
use shiftwalk_core::transfer::{
    cond_invariant_density, convergence_check, example1_orbit, gora_density, orbit_refined_breaks, uniform_breaks, PiecewiseConstantDensity, Side,
};
use shiftwalk_core::walk::{empirical_transitions, iterate, tail_constants, transition_table, IndependenceReport, TailFit, WalkRecord};
use shiftwalk_core::ShiftPeriodicMap;

use crate::error::{RunError, RunResult};
use crate::parallel::{ctrw_parallel, independence_parallel, par_paths, ulam_parallel};

/// Spike parameter of the published density table.
pub const TABLE1_EPS: f64 = 0.01;

/// Intervals and three-decimal density values of the published table for `eps = delta = 0.01`.
pub const TABLE1: [(f64, f64, f64); 13] = [
    (0.0, 0.0025, 1.959),
    (0.0025, 0.01, 1.224),
    (0.01, 0.04, 1.041),
    (0.04, 0.161, 0.995),
    (0.161, 0.206, 0.984),
    (0.206, 0.354, 0.986),
    (0.354, 0.646, 0.988),
    (0.646, 0.794, 0.986),
    (0.794, 0.839, 0.984),
    (0.839, 0.96, 0.995),
    (0.96, 0.99, 1.041),
    (0.99, 0.9975, 1.224),
    (0.9975, 1.0, 1.959),
];

/// One row of the density table comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    /// Interval `(a, b)`.
    pub interval: (f64, f64),
    /// Published value.
    pub paper_value: f64,
    /// Mean of the computed density over the interval.
    pub computed_value: f64,
    /// `|computed - published|`.
    pub abs_error: f64,
}

/// Ulam density of `example1(0.01, 0.01)` against the published table.
#[derive(Debug, Clone, Serialize)]
pub struct Table1Report {
    /// Spike parameter.
    pub eps: f64,
    /// Cells of the uniform grid.
    pub grid_n: usize,
    /// Power iterations used.
    pub iterations: usize,
    /// Final power-iteration residual.
    pub residual: f64,
    /// Comparison rows.
    pub rows: Vec<Table1Row>,
    /// Largest absolute error.
    pub max_abs_error: f64,
}

/// Reproduces the density table on a uniform grid of `grid_n` cells.
pub fn table1(grid_n: usize) -> RunResult<Table1Report> {
    if grid_n < 16 {
        return Err(RunError::Config(format!("grid {grid_n} is below 16")));
    }
    let map = example1(TABLE1_EPS, TABLE1_EPS)?;
    let u = ulam_parallel(&map, uniform_breaks(grid_n))?;
    let d = u.density();
    let rows: Vec<Table1Row> = TABLE1
        .iter()
        .map(|&(a, b, paper_value)| {
            let computed_value = d.average(a, b);
            Table1Row { interval: (a, b), paper_value, computed_value, abs_error: (computed_value - paper_value).abs() }
        })
        .collect();
    let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    Ok(Table1Report { eps: TABLE1_EPS, grid_n, iterations: u.iterations(), residual: u.residual(), rows, max_abs_error })
}

/// One layer `I_n` of the small-parameter density law.
#[derive(Debug, Clone, Serialize)]
pub struct LayerRow {
    /// Layer index.
    pub n: usize,
    /// `(F_r^n(1/4), F_r^{n+1}(1/4))`.
    pub interval: (f64, f64),
    /// Mirror image `(1 - F_r^{n+1}(1/4), 1 - F_r^n(1/4))`.
    pub mirror: (f64, f64),
    /// `1 + 4^{-n}`.
    pub expected: f64,
    /// Largest deviation of the density from `expected` on both parts.
    pub abs_error: f64,
}

/// Density law `1 + 4^{-n}` on the layers near 0 and 1.
#[derive(Debug, Clone, Serialize)]
pub struct LayerReport {
    /// Spike parameter, used for both spikes.
    pub eps: f64,
    /// Bulk cells of the orbit-refined partition.
    pub grid_n: usize,
    /// Orbit points added per spike.
    pub depth: usize,
    /// Total cells.
    pub cells: usize,
    /// One row per layer.
    pub rows: Vec<LayerRow>,
    /// Largest deviation.
    pub max_abs_error: f64,
}

/// Checks the layer law for `example1(eps, eps)` on an orbit-refined partition.
pub fn layer_law(eps: f64, grid_n: usize, depth: usize, n_layers: usize) -> RunResult<LayerReport> {
    let map = example1(eps, eps)?;
    let u = ulam_parallel(&map, orbit_refined_breaks(&map, grid_n, depth))?;
    let d = u.density();
    let orbit = example1_orbit(eps, eps, 0.25, Side::Below, n_layers + 1)?;
    let rows: Vec<LayerRow> = (1..=n_layers)
        .map(|n| {
            let (a, b) = (orbit[n - 1].y, orbit[n].y);
            let expected = 1.0 + 0.25f64.powi(n as i32);
            // Partition breaks and layer ends come from different floating orbits and
            // drift apart by a few ulps of 1 per step; trimming keeps neighbouring layers out of the sup.
            let trim = (1e-6 * (b - a)).max(8.0 * f64::EPSILON);
            let (a, b) = (a + trim, b - trim);
            let err = d.sup_distance_to(|_| expected, a, b).max(d.sup_distance_to(|_| expected, 1.0 - b, 1.0 - a));
            LayerRow { n, interval: (orbit[n - 1].y, orbit[n].y), mirror: (1.0 - orbit[n].y, 1.0 - orbit[n - 1].y), expected, abs_error: err }
        })
        .collect();
    let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    Ok(LayerReport { eps, grid_n, depth, cells: d.cells(), rows, max_abs_error })
}

/// Convergence of the transfer operator with holes to its fixed point.
#[derive(Debug, Clone, Serialize)]
pub struct FpConvergenceReport {
    /// Left spike parameter.
    pub eps: f64,
    /// Right spike parameter.
    pub delta: f64,
    /// Starting density value on `(0, 1/2)`.
    pub x: f64,
    /// Conditionally invariant density value on `(1/4, 3/4)`.
    pub nu: f64,
    /// Surviving mass of the fixed point.
    pub surviving_mass: f64,
    /// Sup distance between the fixed point and its image.
    pub fixed_point_residual: f64,
    /// Sup distance after `n = 1, 2, ...` steps.
    pub distances: Vec<f64>,
    /// `6 (2/3)^n`.
    pub envelope: Vec<f64>,
    /// Every distance lies below the envelope.
    pub within_envelope: bool,
}

/// Iterates the two-piece density `(x, 2 - x)` and compares with `6 (2/3)^n`.
pub fn fp_convergence(eps: f64, delta: f64, x: f64, n_max: usize) -> RunResult<FpConvergenceReport> {
    let c = cond_invariant_density(eps, delta)?;
    let (fixed_point_residual, surviving_mass) = c.fixed_point_residual()?;
    let distances = convergence_check(eps, delta, x, n_max)?;
    let envelope: Vec<f64> = (1..=n_max).map(|n| 6.0 * (2.0f64 / 3.0).powi(n as i32)).collect();
    let within_envelope = distances.iter().zip(&envelope).all(|(d, e)| d <= e);
    Ok(FpConvergenceReport { eps, delta, x, nu: c.nu, surviving_mass, fixed_point_residual, distances, envelope, within_envelope })
}

/// How a density is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DensityMethod {
    /// Ulam approximation.
    Ulam,
    /// Truncated closed form, for `example1` only.
    Closed,
}

/// Summary of a computed density.
#[derive(Debug, Clone, Serialize)]
pub struct DensitySummary {
    /// Map family.
    pub map: String,
    /// Map parameters.
    pub params: Vec<(String, f64)>,
    /// Method used.
    pub method: DensityMethod,
    /// Cells of the result.
    pub cells: usize,
    /// Smallest value.
    pub min: f64,
    /// Largest value.
    pub max: f64,
    /// Power iterations, for the Ulam method.
    pub iterations: Option<usize>,
    /// `max |pi P - pi|`, for the Ulam method.
    pub stationarity_error: Option<f64>,
    /// Largest deviation of a row sum from one, for the Ulam method.
    pub row_sum_error: Option<f64>,
    /// Normalization constant, for the closed form.
    pub normalization: Option<f64>,
}

/// Invariant density of `F_r`.
///
/// The Ulam grid is refined by `refine_depth` orbit points of every branch
/// end when that is positive. The closed form uses `n_terms` iterates and
/// unit weights `D`.
pub fn density(map: &ShiftPeriodicMap, method: DensityMethod, grid_n: usize, refine_depth: usize, n_terms: usize) -> RunResult<(PiecewiseConstantDensity, DensitySummary)> {
    let base = |d: &PiecewiseConstantDensity| {
        let min = d.values().iter().copied().fold(f64::INFINITY, f64::min);
        let max = d.values().iter().copied().fold(0.0, f64::max);
        DensitySummary {
            map: map.name().to_string(),
            params: map.params().to_vec(),
            method,
            cells: d.cells(),
            min,
            max,
            iterations: None,
            stationarity_error: None,
            row_sum_error: None,
            normalization: None,
        }
    };
    match method {
        DensityMethod::Ulam => {
            if grid_n < 16 {
                return Err(RunError::Config(format!("grid {grid_n} is below 16")));
            }
            let breaks = if refine_depth > 0 { orbit_refined_breaks(map, grid_n, refine_depth) } else { uniform_breaks(grid_n) };
            let u = ulam_parallel(map, breaks)?;
            let d = u.density();
            let mut s = base(&d);
            s.iterations = Some(u.iterations());
            s.stationarity_error = Some(u.stationarity_error());
            s.row_sum_error = Some(u.row_sum_error());
            Ok((d, s))
        }
        DensityMethod::Closed => {
            if map.name() != "example1" {
                return Err(RunError::Config("the closed form exists only for example1".into()));
            }
            let (eps, delta) = (map.param("eps").unwrap_or(0.0), map.param("delta").unwrap_or(0.0));
            let g = gora_density(eps, delta, [1.0; 4], n_terms)?;
            let d = g.to_piecewise();
            let mut s = base(&d);
            s.normalization = Some(g.k);
            Ok((d, s))
        }
    }
}

/// Orbit of `x0` with its cocycle.
pub fn trajectory(map: &ShiftPeriodicMap, x0: f64, steps: usize) -> RunResult<WalkRecord> {
    Ok(iterate(map, x0, steps)?)
}

/// Exact and sampled probability of one jump size.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionRow {
    /// Jump size.
    pub m: i64,
    /// Exact probability.
    pub exact: f64,
    /// Sample frequency.
    pub empirical: f64,
    /// `(empirical - exact) / se` with `se = sqrt(p (1 - p) / n)`.
    pub z: f64,
}

/// Transition probabilities of the walk.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionsReport {
    /// Map family.
    pub map: String,
    /// Map parameters.
    pub params: Vec<(String, f64)>,
    /// Largest `|m|` tabulated exactly.
    pub bound: u64,
    /// Mass beyond the bound.
    pub tail_mass: f64,
    /// Mean of the tabulated part.
    pub mean: f64,
    /// Variance of the tabulated part.
    pub variance: f64,
    /// Uniform samples drawn.
    pub samples: usize,
    /// One row per jump size seen in either table.
    pub rows: Vec<TransitionRow>,
    /// Largest `|z|` over rows with positive exact probability.
    pub max_abs_z: f64,
}

/// Exact transition table against `samples` uniform draws.
pub fn transitions(map: &ShiftPeriodicMap, bound: u64, samples: usize, seed: u64) -> RunResult<TransitionsReport> {
    let exact = transition_table(map, bound)?;
    let emp = empirical_transitions(map, &Uniform01, samples, seed)?;
    let mut keys: Vec<i64> = exact.entries.keys().chain(emp.entries.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let n = samples as f64;
    let rows: Vec<TransitionRow> = keys
        .into_iter()
        .map(|m| {
            let (p, q) = (exact.p(m), emp.p(m));
            let se = (p * (1.0 - p) / n).sqrt();
            let z = if se > 0.0 { (q - p) / se } else if q == p { 0.0 } else { f64::INFINITY };
            TransitionRow { m, exact: p, empirical: q, z }
        })
        .collect();
    let max_abs_z = rows.iter().filter(|r| r.exact > 0.0).map(|r| r.z.abs()).fold(0.0, f64::max);
    Ok(TransitionsReport {
        map: map.name().to_string(),
        params: map.params().to_vec(),
        bound,
        tail_mass: exact.tail_mass,
        mean: exact.mean(),
        variance: exact.variance(),
        samples,
        rows,
        max_abs_z,
    })
}

/// Independence of consecutive increments for orbits started from Lebesgue measure.
pub fn independence(map: &ShiftPeriodicMap, steps: usize, paths: usize, seed: u64) -> RunResult<IndependenceReport> {
    if steps < 2 || paths == 0 {
        return Err(RunError::Config("need at least two steps and one path".into()));
    }
    Ok(independence_parallel(map, &Uniform01, steps, paths, seed)?)
}

/// Construction of the conjugating homeomorphism.
#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyReport {
    /// Map family.
    pub map: String,
    /// Refinement depth.
    pub depth: usize,
    /// Intervals of the full-branch partition.
    pub partition_intervals: usize,
    /// Lebesgue measure not covered by the partition.
    pub residual_measure: f64,
    /// `sup |h(G_r(u)) - F_r(h(u))|` on the probe grid.
    pub conjugacy_residual: f64,
    /// Widest depth cylinder met by the probes.
    pub max_cylinder_width: f64,
    /// `max |h(u) - u|` over the knots, when they fit the budget.
    pub knot_deviation: Option<f64>,
    /// Number of knots, when they fit the budget.
    pub knots: Option<usize>,
    /// Two-sample test of `F_r(h(U))` against `h(U)`.
    pub invariance: KsReport,
}

/// Builds `h` to `depth` and tests the law of `h(U)` for invariance with `samples` draws per side.
pub fn conjugacy(map: &ShiftPeriodicMap, depth: usize, n_probe: usize, samples: usize, seed: u64, knot_budget: usize) -> RunResult<(ConjugacyReport, Option<Vec<(f64, f64)>>)> {
    let h = build_h(map, depth)?;
    let residual = conjugacy_residual(&h, map, h.partition(), n_probe)?;
    let knots = h.knots(knot_budget).ok();
    let a: Vec<f64> = invariant_sampler(&h, seed).take(samples).collect();
    let b: Vec<f64> = invariant_sampler(&h, seed.wrapping_add(1)).take(samples).map(|x| map.eval_restricted(x)).collect();
    let invariance = ks_two_sample(&a, &b)?;
    let report = ConjugacyReport {
        map: map.name().to_string(),
        depth,
        partition_intervals: h.partition().intervals.len(),
        residual_measure: h.partition().residual_measure(),
        conjugacy_residual: residual,
        max_cylinder_width: h.max_cylinder_width(n_probe),
        knot_deviation: knots.as_ref().map(|k| k.iter().map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)),
        knots: knots.as_ref().map(Vec::len),
        invariance,
    };
    Ok((report, knots))
}

/// Structural check of a map.
#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    /// Map family.
    pub map: String,
    /// Map parameters.
    pub params: Vec<(String, f64)>,
    /// Result of the checks.
    pub report: ValidationReport,
}

/// Checks the shift-periodic conditions on a grid of `grid_n` points per branch.
pub fn validate_map(map: &ShiftPeriodicMap, grid_n: usize, tol: f64) -> RunResult<ValidateReport> {
    Ok(ValidateReport { map: map.name().to_string(), params: map.params().to_vec(), report: validate(map, grid_n, tol)? })
}

/// How paths of the rescaled walk are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FcltMode {
    /// Sums of independent draws of `floor(F(U))`, the walk under the invariant law.
    Increments,
    /// Floating-point iteration of the map from a uniform start.
    Direct,
}

/// Exponent standing in for light tails; any value above 2 selects the Gaussian row.
pub const LIGHT_TAIL_KAPPA: f64 = 3.0;

/// Tail exponent and constants used to scale the walk.
///
/// `example2` has exact tails `P(+-Y > M) ~ 2 C^kappa M^{-kappa}`; other maps
/// use a fit on `[1e3, 1e5]`, and light tails get the Gaussian row.
pub fn fclt_plan(map: &ShiftPeriodicMap, bound: u64) -> RunResult<ScalingPlan> {
    let table = transition_table(map, bound)?;
    let (kappa, cp, cm) = match (map.name(), map.param("kappa")) {
        ("example2", Some(k)) => {
            let c = 2.0 * example2_constant(k).powf(k);
            (k, c, c)
        }
        _ => match tail_constants(map, 1e3, 1e5, 12)? {
            TailFit::PowerLaw { kappa, c_plus, c_minus } => (kappa, c_plus, c_minus),
            TailFit::LightTailed => (LIGHT_TAIL_KAPPA, 1.0, 1.0),
        },
    };
    let mean = (kappa > 1.0).then(|| table.mean());
    let variance = (kappa > 2.0).then(|| table.variance());
    Ok(scaling_plan(kappa, cp, cm, mean, variance)?)
}

/// Distribution function of the limit law at time one.
pub fn limit_cdf(p: &StableParams, x: f64) -> f64 {
    if p.alpha() == 2.0 {
        gaussian_limit_cdf(x)
    } else if p.alpha() == 1.0 && p.beta() == 0.0 {
        cauchy_cdf(x)
    } else {
        stable_cdf(p, x).unwrap_or(f64::NAN)
    }
}

/// Marginal test at one time.
#[derive(Debug, Clone, Serialize)]
pub struct FcltMarginal {
    /// Time.
    pub t: f64,
    /// Test of `V(t)` against `t^{1/alpha}` times the limit law.
    pub ks: KsReport,
}

/// Marginals of the rescaled walk against the stable limit.
#[derive(Debug, Clone, Serialize)]
pub struct FcltReport {
    /// Map family.
    pub map: String,
    /// Map parameters.
    pub params: Vec<(String, f64)>,
    /// Generation mode.
    pub mode: FcltMode,
    /// Steps per unit time.
    pub n: usize,
    /// Paths.
    pub paths: usize,
    /// Scaling used.
    pub plan: ScalingPlan,
    /// Stable index of the limit.
    pub alpha: f64,
    /// Skewness of the limit.
    pub beta: f64,
    /// One test per positive grid time.
    pub marginals: Vec<FcltMarginal>,
    /// Paths redrawn after a singular hit.
    pub resampled: usize,
}

/// Simulates `paths` rescaled walks and tests their marginals.
pub fn fclt(map: &ShiftPeriodicMap, plan: &ScalingPlan, mode: FcltMode, n: usize, paths: usize, t_grid: &[f64], seed: u64) -> RunResult<(FcltReport, Vec<Vec<f64>>)> {
    if n == 0 || paths == 0 {
        return Err(RunError::Config("n and paths must be positive".into()));
    }
    let sims: Vec<_> = par_paths(paths, seed, |rng, _| match mode {
        FcltMode::Increments => simulate_vn_increments(map, n, t_grid, plan, rng),
        FcltMode::Direct => simulate_vn(map, &Uniform01, n, t_grid, plan, rng),
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    let limit = plan.limit();
    let mut marginals = Vec::new();
    for (j, &t) in t_grid.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        let scale = t.powf(1.0 / limit.alpha());
        let v: Vec<f64> = sims.iter().map(|p| p.v[j]).collect();
        marginals.push(FcltMarginal { t, ks: ks_one_sample(&v, |x| limit_cdf(&limit, x / scale))? });
    }
    let resampled = sims.iter().map(|p| p.resampled).sum();
    let values = sims.into_iter().map(|p| p.v).collect();
    let report = FcltReport {
        map: map.name().to_string(),
        params: map.params().to_vec(),
        mode,
        n,
        paths,
        plan: *plan,
        alpha: limit.alpha(),
        beta: limit.beta(),
        marginals,
        resampled,
    };
    Ok((report, values))
}

/// Waiting times of the small-hole walk against `Exp(gamma)`.
#[derive(Debug, Clone, Serialize)]
pub struct CtrwReport {
    /// Left spike parameter before scaling.
    pub eps: f64,
    /// Right spike parameter before scaling.
    pub delta: f64,
    /// Time scaling.
    pub m: usize,
    /// Time horizon.
    pub horizon: f64,
    /// Paths.
    pub paths: usize,
    /// Starting law.
    pub init: CtrwInit,
    /// `3 (eps + delta) / 16`.
    pub gamma: f64,
    /// `m` times the one-step hole measure of the scaled map.
    pub scaled_hole_measure: f64,
    /// Gaps starting after `horizon - guard` are dropped.
    pub guard: f64,
    /// Pooled waiting times.
    pub waiting_times: usize,
    /// Mean pooled waiting time, to compare with `1 / gamma`.
    pub mean_waiting_time: f64,
    /// Test of the pooled waiting times.
    pub ks: KsReport,
    /// Test of the first waiting times alone.
    pub ks_first: Option<KsReport>,
    /// Every jump has size one.
    pub unit_jumps: bool,
}

/// Simulates the rescaled small-hole map and tests its waiting times.
pub fn ctrw(eps: f64, delta: f64, m: usize, horizon: f64, paths: usize, init: CtrwInit, seed: u64) -> RunResult<(CtrwReport, Vec<JumpRecord>)> {
    if m == 0 || paths == 0 || !(horizon > 0.0) {
        return Err(RunError::Config("m, paths and horizon must be positive".into()));
    }
    let records = ctrw_parallel(eps, delta, m, horizon, init, paths, seed)?;
    let g = gamma(eps, delta);
    let guard = default_guard(horizon, g);
    let pooled: Vec<f64> = records.iter().flat_map(|r| r.waiting_times(guard)).collect();
    let ks = waiting_time_test(&records, g)?;
    let first: Vec<f64> = records.iter().filter_map(|r| r.jump_times().first().copied()).filter(|t| *t <= horizon - guard).collect();
    let ks_first = shiftwalk_core::limits::exponential_test(&first, g).ok();
    let report = CtrwReport {
        eps,
        delta,
        m,
        horizon,
        paths,
        init,
        gamma: g,
        scaled_hole_measure: m as f64 * hole_measure(eps / m as f64, delta / m as f64),
        guard,
        waiting_times: pooled.len(),
        mean_waiting_time: pooled.iter().sum::<f64>() / pooled.len().max(1) as f64,
        ks,
        ks_first,
        unit_jumps: records.iter().all(JumpRecord::unit_jumps),
    };
    Ok((report, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use shiftwalk_core::maps::builtin::example2;

    #[test]
    fn table_intervals_tile_the_unit_interval() {
        assert_eq!(TABLE1[0].0, 0.0);
        assert_eq!(TABLE1[12].1, 1.0);
        assert!(TABLE1.windows(2).all(|w| w[0].1 == w[1].0));
        // symmetric for equal spikes
        for i in 0..13 {
            assert_eq!(TABLE1[i].2, TABLE1[12 - i].2);
        }
    }

    #[test]
    fn small_grid_table_runs() {
        let r = table1(400).unwrap();
        assert_eq!(r.rows.len(), 13);
        assert!(r.max_abs_error < 0.05, "{}", r.max_abs_error);
    }

    #[test]
    fn layer_intervals_follow_the_orbit() {
        let r = layer_law(1e-3, 200, 12, 3).unwrap();
        // the first image is `1 + eps / 4`, so its fractional part carries one ulp of 1
        assert!((r.rows[0].interval.0 - 1e-3 / 4.0).abs() < 1e-15);
        assert!(r.rows.windows(2).all(|w| w[0].interval.1 == w[1].interval.0));
        assert!((r.rows[0].mirror.1 - (1.0 - 2.5e-4)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_density_needs_example1() {
        let m = example2(1.0).unwrap();
        assert!(matches!(density(&m, DensityMethod::Closed, 100, 0, 10), Err(RunError::Config(_))));
        let m = example1(0.1, 0.1).unwrap();
        let (d, s) = density(&m, DensityMethod::Closed, 100, 0, 20).unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-12);
        assert!(s.normalization.unwrap() > 1.0);
    }

    #[test]
    fn example2_plan_uses_exact_tails() {
        let p = fclt_plan(&example2(1.0).unwrap(), 1000).unwrap();
        assert!((p.c_plus - 0.375).abs() < 1e-12);
        assert_eq!(p.mean, None);
        let p = fclt_plan(&example2(10.0).unwrap(), 1000).unwrap();
        assert!(p.variance.unwrap() > 0.0);
        let p = fclt_plan(&example1(4.0, 4.0).unwrap(), 100).unwrap();
        assert_eq!(p.alpha(), 2.0);
        assert!((p.variance.unwrap() - 7.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn limit_cdf_dispatch() {
        assert!((limit_cdf(&StableParams::new(1.0, 0.0).unwrap(), 1.0) - 0.75).abs() < 1e-15);
        assert_eq!(limit_cdf(&StableParams::new(2.0, 0.0).unwrap(), 0.0), 0.5);
        let v = limit_cdf(&StableParams::new(1.5, 0.5).unwrap(), 0.3);
        assert!(v > 0.0 && v < 1.0);
    }
}
