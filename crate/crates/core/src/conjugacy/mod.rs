//! The conjugacy between a map with integer spikes and its linearization.
//!
//! Cutting every branch at the preimages of the integers gives intervals
//! `(a_i, b_i)` that `F_r` maps onto `(0, 1)`. The linearization `g` is affine
//! on each of them with the same orientation. Both maps then share the same
//! symbolic dynamics, and the homeomorphism `h` with `F_r o h = h o g` sends
//! each depth-`n` cylinder of `g` onto the cylinder of `F_r` with the same
//! itinerary. Because `g` preserves Lebesgue measure, `h(U)` is invariant
//! under `F_r` and the walk started from `h(U)` has independent increments.

use alloc::vec::Vec;

use rand::RngCore;

use crate::maps::{validate, BranchCoord, Orientation, ShiftPeriodicMap};
use crate::math::{self, KahanSum};
use crate::rng::{path_rng, UnitSampler};
use crate::walk::branch_level_pieces;
use crate::{Error, Result};

/// Default bound on `|jump|` for enumerating partition intervals.
pub const DEFAULT_JUMP_BOUND: u64 = 10_000;

/// Cylinders narrower than this are not refined further.
pub const MIN_CYLINDER_WIDTH: f64 = 1e-13;

/// An interval that `F_r` maps monotonically onto `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionInterval {
    /// Branch the interval belongs to.
    pub branch: usize,
    /// Left end in branch coordinates.
    pub start: BranchCoord,
    /// Right end in branch coordinates.
    pub end: BranchCoord,
    /// Left end.
    pub a: f64,
    /// Right end.
    pub b: f64,
    /// Exact length, which may exceed `b - a` after rounding.
    pub length: f64,
    /// `floor(F)` on the interval.
    pub jump: i64,
    /// Orientation of the branch.
    pub orientation: Orientation,
}

/// Part of `[0, 1]` next to an accumulation point, left unrefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualInterval {
    /// Branch the interval belongs to.
    pub branch: usize,
    /// Left end.
    pub a: f64,
    /// Right end.
    pub b: f64,
    /// Exact length.
    pub length: f64,
}

/// Intervals on which `F_r` is a full branch, plus the unrefined residual.
#[derive(Debug, Clone, PartialEq)]
pub struct FullBranchPartition {
    /// Full-branch intervals, left to right.
    pub intervals: Vec<PartitionInterval>,
    /// Residual intervals holding all jumps beyond the bound.
    pub residual: Vec<ResidualInterval>,
    /// Bound on `|jump|` used for the enumeration.
    pub jump_bound: u64,
}

/// Where a point sits relative to a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    /// Inside full-branch interval `i`.
    Interval(usize),
    /// Inside residual interval `i`.
    Residual(usize),
    /// On an interval end or at a singular point.
    Boundary,
}

impl FullBranchPartition {
    /// Total length of the full-branch intervals.
    pub fn interval_measure(&self) -> f64 {
        math::sum_compensated(self.intervals.iter().map(|i| i.length))
    }

    /// Total length of the residual.
    pub fn residual_measure(&self) -> f64 {
        math::sum_compensated(self.residual.iter().map(|r| r.length))
    }

    /// Locates `u` in `[0, 1]`.
    pub fn locate(&self, u: f64) -> Cell {
        let k = self.intervals.partition_point(|iv| iv.b <= u);
        if let Some(iv) = self.intervals.get(k) {
            if iv.a < u && u < iv.b {
                return Cell::Interval(k);
            }
        }
        for (i, r) in self.residual.iter().enumerate() {
            if r.a < u && u < r.b {
                return Cell::Residual(i);
            }
        }
        Cell::Boundary
    }

    /// The linearization `g` at `u`; `None` off the full-branch intervals.
    pub fn linearization(&self, u: f64) -> Option<(usize, f64)> {
        match self.locate(u) {
            Cell::Interval(i) => Some((i, self.g(i, u))),
            _ => None,
        }
    }

    #[inline]
    fn g(&self, i: usize, u: f64) -> f64 {
        let iv = &self.intervals[i];
        let t = match iv.orientation {
            Orientation::Increasing => (u - iv.a) / (iv.b - iv.a),
            Orientation::Decreasing => (iv.b - u) / (iv.b - iv.a),
        };
        t.clamp(0.0, 1.0)
    }

    #[inline]
    fn g_inv(&self, i: usize, t: f64) -> f64 {
        let iv = &self.intervals[i];
        if t <= 0.0 {
            return if iv.orientation == Orientation::Increasing { iv.a } else { iv.b };
        }
        if t >= 1.0 {
            return if iv.orientation == Orientation::Increasing { iv.b } else { iv.a };
        }
        match iv.orientation {
            Orientation::Increasing => iv.a + t * (iv.b - iv.a),
            Orientation::Decreasing => iv.b - t * (iv.b - iv.a),
        }
    }

    fn f_inv(&self, map: &ShiftPeriodicMap, i: usize, t: f64) -> f64 {
        let iv = &self.intervals[i];
        let inc = iv.orientation == Orientation::Increasing;
        if t <= 0.0 {
            return if inc { iv.a } else { iv.b };
        }
        if t >= 1.0 {
            return if inc { iv.b } else { iv.a };
        }
        let b = &map.branches()[iv.branch];
        match b.solve(iv.jump as f64 + t) {
            Ok(c) => b.x_of(c).clamp(iv.a, iv.b),
            Err(_) => iv.a + t * (iv.b - iv.a),
        }
    }
}

/// Splits every branch at the preimages of the integer levels `|m| <= jump_bound`.
///
/// The map must pass the integer-spike validation. Jumps beyond the bound
/// stay in residual intervals that carry their exact length.
pub fn full_branch_partition(map: &ShiftPeriodicMap, jump_bound: u64) -> Result<FullBranchPartition> {
    let report = validate(map, 512, 1e-9)?;
    if !report.has_integer_spikes {
        let first = report.violations.first().map(|v| alloc::format!("{:?} at {}", v.condition, v.witness)).unwrap_or_default();
        return Err(Error::Condition(alloc::format!("map `{}` has no integer spikes: {first}", map.name())));
    }
    let mut intervals = Vec::new();
    let mut residual = Vec::new();
    for (i, b) in map.branches().iter().enumerate() {
        for p in branch_level_pieces(i, b, jump_bound)? {
            let (a, e) = (b.x_of(p.start), b.x_of(p.end));
            if p.tail {
                residual.push(ResidualInterval { branch: i, a, b: e, length: p.length });
            } else {
                intervals.push(PartitionInterval {
                    branch: i,
                    start: p.start,
                    end: p.end,
                    a,
                    b: e,
                    length: p.length,
                    jump: p.jump,
                    orientation: b.orientation(),
                });
            }
        }
    }
    Ok(FullBranchPartition { intervals, residual, jump_bound })
}

/// An increasing bijection of `[0, 1]` fixing both ends.
pub trait Homeomorphism {
    /// Image of `u`.
    fn apply(&self, u: f64) -> f64;
}

impl<H: Homeomorphism + ?Sized> Homeomorphism for &H {
    fn apply(&self, u: f64) -> f64 {
        (**self).apply(u)
    }
}

/// The identity map.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Homeomorphism for Identity {
    fn apply(&self, u: f64) -> f64 {
        u
    }
}

/// A homeomorphism given by a closure.
#[derive(Debug, Clone, Copy)]
pub struct FnHomeomorphism<F>(pub F);

impl<F: Fn(f64) -> f64> Homeomorphism for FnHomeomorphism<F> {
    fn apply(&self, u: f64) -> f64 {
        (self.0)(u)
    }
}

/// Piecewise-linear homeomorphism through increasing knots `(u, h(u))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotHomeomorphism {
    knots: Vec<(f64, f64)>,
}

impl KnotHomeomorphism {
    /// Checks that the knots start at `(0, 0)`, end at `(1, 1)` and increase strictly.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let ok_ends = knots.first() == Some(&(0.0, 0.0)) && knots.last() == Some(&(1.0, 1.0));
        let increasing = knots.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        if !ok_ends || !increasing {
            return Err(Error::param("knots", "must increase strictly from (0, 0) to (1, 1)"));
        }
        Ok(KnotHomeomorphism { knots })
    }

    /// The knots.
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }
}

impl Homeomorphism for KnotHomeomorphism {
    fn apply(&self, u: f64) -> f64 {
        let k = self.knots.partition_point(|p| p.0 <= u).clamp(1, self.knots.len() - 1);
        let ((u0, h0), (u1, h1)) = (self.knots[k - 1], self.knots[k]);
        h0 + (u - u0) / (u1 - u0) * (h1 - h0)
    }
}

/// The depth-`n` approximation `h_n` of the conjugacy.
///
/// `h_n` maps each cylinder `J^g_b` of `g` with `|b| = n` linearly onto the
/// cylinder `J^f_b` of `F_r`. Values are computed on demand by following the
/// itinerary of `u`, so deep approximations cost nothing up front.
#[derive(Debug, Clone)]
pub struct HomeomorphismApprox {
    map: ShiftPeriodicMap,
    partition: FullBranchPartition,
    depth: usize,
}

/// Details of one evaluation of [`HomeomorphismApprox`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HEval {
    /// `h_n(u)`.
    pub value: f64,
    /// Cylinder depth actually used.
    pub depth_used: usize,
    /// Width of the `g` cylinder containing `u`.
    pub g_width: f64,
    /// Width of the matching `F_r` cylinder.
    pub f_width: f64,
    /// Refinement stopped early because the cylinder fell below [`MIN_CYLINDER_WIDTH`].
    pub capped: bool,
}

#[derive(Clone, Copy)]
enum Symbol {
    Full(usize),
    Residual(usize),
    Point(f64),
}

/// Builds `h_depth` for a map with integer spikes.
pub fn build_h(map: &ShiftPeriodicMap, depth: usize) -> Result<HomeomorphismApprox> {
    build_h_with_bound(map, depth, DEFAULT_JUMP_BOUND)
}

/// [`build_h`] with an explicit jump bound for the partition.
pub fn build_h_with_bound(map: &ShiftPeriodicMap, depth: usize, jump_bound: u64) -> Result<HomeomorphismApprox> {
    if depth == 0 {
        return Err(Error::param("depth", "must be at least 1"));
    }
    let partition = full_branch_partition(map, jump_bound)?;
    Ok(HomeomorphismApprox { map: map.clone(), partition, depth })
}

impl HomeomorphismApprox {
    /// Refinement depth.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The partition the conjugacy is built on.
    pub fn partition(&self) -> &FullBranchPartition {
        &self.partition
    }

    /// The map being linearized.
    pub fn map(&self) -> &ShiftPeriodicMap {
        &self.map
    }

    /// Evaluates `h_n(u)` and reports the cylinder used.
    pub fn eval(&self, u: f64) -> HEval {
        if u <= 0.0 || u >= 1.0 {
            return HEval { value: u.clamp(0.0, 1.0), depth_used: 0, g_width: 0.0, f_width: 0.0, capped: false };
        }
        let mut symbols: Vec<Symbol> = Vec::with_capacity(self.depth);
        let mut y = u;
        let mut width = 1.0;
        let mut capped = false;
        for _ in 0..self.depth {
            match self.partition.locate(y) {
                Cell::Interval(i) => {
                    let iv = &self.partition.intervals[i];
                    if width * iv.length < MIN_CYLINDER_WIDTH {
                        capped = true;
                        break;
                    }
                    width *= iv.length;
                    symbols.push(Symbol::Full(i));
                    y = self.partition.g(i, y);
                }
                Cell::Residual(r) => {
                    symbols.push(Symbol::Residual(r));
                    break;
                }
                Cell::Boundary => {
                    symbols.push(Symbol::Point(y));
                    break;
                }
            }
        }
        let depth_used = symbols.iter().filter(|s| matches!(s, Symbol::Full(_))).count();
        let (p, q) = self.cylinder(&symbols, |i, t| self.partition.g_inv(i, t));
        let (r, s) = self.cylinder(&symbols, |i, t| self.partition.f_inv(&self.map, i, t));
        let value = if q > p { r + (u - p) / (q - p) * (s - r) } else { r };
        HEval { value: value.clamp(r.min(s), r.max(s)), depth_used, g_width: q - p, f_width: s - r, capped }
    }

    fn cylinder(&self, symbols: &[Symbol], inv: impl Fn(usize, f64) -> f64) -> (f64, f64) {
        let (mut lo, mut hi, mut rest) = (0.0, 1.0, symbols);
        if let Some((last, init)) = symbols.split_last() {
            match *last {
                Symbol::Residual(k) => {
                    let r = &self.partition.residual[k];
                    (lo, hi, rest) = (r.a, r.b, init);
                }
                Symbol::Point(y) => (lo, hi, rest) = (y, y, init),
                Symbol::Full(_) => {}
            }
        }
        // Images of the unit interval under the composed inverse branches.
        for s in rest.iter().rev() {
            if let Symbol::Full(i) = *s {
                let (x0, x1) = (inv(i, lo), inv(i, hi));
                (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
            }
        }
        (lo, hi)
    }

    /// All knots `(u, h_n(u))`: the cylinder ends at depth `n`.
    ///
    /// The number of cylinders grows like `#intervals^n`, so the enumeration
    /// refuses to exceed `budget` knots.
    pub fn knots(&self, budget: usize) -> Result<Vec<(f64, f64)>> {
        let k = self.partition.intervals.len() as u128;
        let needed = k.saturating_pow(self.depth as u32).saturating_add(1);
        if needed > budget as u128 {
            return Err(Error::Budget { needed, budget });
        }
        let mut out = Vec::with_capacity(needed as usize + self.partition.residual.len() * 2);
        let mut stack: Vec<Symbol> = Vec::with_capacity(self.depth);
        self.collect_knots(&mut stack, &mut out);
        out.push((0.0, 0.0));
        out.push((1.0, 1.0));
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.dedup_by(|a, b| a.0 == b.0);
        Ok(out)
    }

    fn collect_knots(&self, stack: &mut Vec<Symbol>, out: &mut Vec<(f64, f64)>) {
        if stack.len() == self.depth {
            let g = self.cylinder(stack, |i, t| self.partition.g_inv(i, t));
            let f = self.cylinder(stack, |i, t| self.partition.f_inv(&self.map, i, t));
            out.push((g.0, f.0));
            out.push((g.1, f.1));
            return;
        }
        for r in 0..self.partition.residual.len() {
            stack.push(Symbol::Residual(r));
            let g = self.cylinder(stack, |i, t| self.partition.g_inv(i, t));
            let f = self.cylinder(stack, |i, t| self.partition.f_inv(&self.map, i, t));
            out.push((g.0, f.0));
            out.push((g.1, f.1));
            stack.pop();
        }
        for i in 0..self.partition.intervals.len() {
            stack.push(Symbol::Full(i));
            self.collect_knots(stack, out);
            stack.pop();
        }
    }

    /// Largest `F_r` cylinder width seen over `n_probe` evenly spread points.
    ///
    /// This is the error proxy for `|h_n - h|`; it is an observed maximum, not a bound.
    pub fn max_cylinder_width(&self, n_probe: usize) -> f64 {
        probes(n_probe).map(|u| self.eval(u).f_width).fold(0.0, f64::max)
    }

    /// Maximum histogram density of `h_n(U)` on `bins` equal bins.
    ///
    /// Values far above 1 signal that `h(U)` concentrates on small sets, as
    /// happens when `h` is not absolutely continuous. Reported only.
    pub fn concentration_score(&self, bins: usize, n_probe: usize) -> f64 {
        let mut hist = alloc::vec![0usize; bins.max(1)];
        for u in probes(n_probe) {
            let v = self.apply(u);
            let k = ((v * bins as f64) as usize).min(bins - 1);
            hist[k] += 1;
        }
        hist.iter().copied().max().unwrap_or(0) as f64 * bins as f64 / n_probe as f64
    }
}

impl Homeomorphism for HomeomorphismApprox {
    fn apply(&self, u: f64) -> f64 {
        self.eval(u).value
    }
}

/// Evenly spread probe points shifted by the golden ratio so they avoid rational cylinder ends.
fn probes(n: usize) -> impl Iterator<Item = f64> {
    const SHIFT: f64 = 0.618_033_988_749_894_8;
    (0..n).map(move |k| (k as f64 + SHIFT) / n as f64)
}

/// `max |h(g(u)) - F_r(h(u))|` over probe points inside full-branch intervals.
///
/// Distances are taken on the circle `R / Z`, matching the range of `F_r`.
pub fn conjugacy_residual(h: &dyn Homeomorphism, map: &ShiftPeriodicMap, partition: &FullBranchPartition, n_probe: usize) -> Result<f64> {
    if n_probe == 0 {
        return Err(Error::param("n_probe", "must be positive"));
    }
    let mut worst: f64 = 0.0;
    for u in probes(n_probe) {
        let Some((_, gu)) = partition.linearization(u) else { continue };
        let d = (h.apply(gu) - map.eval_restricted(h.apply(u))).abs();
        worst = worst.max(d.min(1.0 - d));
    }
    Ok(worst)
}

/// The distribution of `h(U)` for uniform `U`.
#[derive(Debug, Clone)]
pub struct ConjugacySampler<H>(pub H);

impl<H: Homeomorphism> UnitSampler for ConjugacySampler<H> {
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.0.apply(rand::Rng::random::<f64>(rng))
    }
}

/// Infinite stream of draws `h(U)`.
pub fn invariant_sampler<H: Homeomorphism>(h: H, seed: u64) -> impl Iterator<Item = f64> {
    let mut rng = path_rng(seed, 0);
    let s = ConjugacySampler(h);
    core::iter::repeat_with(move || s.sample(&mut rng))
}

/// Measure `Leb{u: floor(F(h(u))) = m}` estimated on `n_probe` probes, for checking that `h` preserves jump masses.
pub fn pushed_jump_frequencies(h: &dyn Homeomorphism, map: &ShiftPeriodicMap, n_probe: usize) -> alloc::collections::BTreeMap<i64, f64> {
    let mut acc: alloc::collections::BTreeMap<i64, KahanSum> = alloc::collections::BTreeMap::new();
    for u in probes(n_probe) {
        if let Some(v) = map.eval_unit(h.apply(u)).finite() {
            acc.entry(math::floor(v) as i64).or_default().add(1.0 / n_probe as f64);
        }
    }
    acc.into_iter().map(|(m, s)| (m, s.value())).collect()
}
