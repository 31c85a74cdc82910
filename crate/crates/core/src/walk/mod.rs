//! The walk on `Z` generated by a shift-periodic map.
//!
//! For `x` in `[0, 1]` the cocycle `phi(x, n) = floor(F^n(x))` counts the unit
//! cells crossed by the orbit. It is computed through the skew product
//! `(x, m) -> (F_r(x), m + floor(F(x)))`, which keeps the fractional part at
//! full precision no matter how far the orbit travels.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::maps::{BranchCoord, ExtendedReal, MonotoneBranch, Orientation, ShiftPeriodicMap};
use crate::math::{self, sum_compensated, KahanSum};
use crate::rng::{path_rng, UnitSampler};
use crate::{Error, Result};

/// An orbit of the map together with its decomposition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WalkRecord {
    /// Starting point in `[0, 1]`.
    pub x0: f64,
    /// `x_n = F^n(x0)`, rebuilt as `fractional[n] + cocycle[n]`; infinite after a singular hit.
    pub positions: Vec<f64>,
    /// `F_r^n(x0)`.
    pub fractional: Vec<f64>,
    /// `phi(x0, n)`, frozen at 0 from the first singular hit on.
    pub cocycle: Vec<i64>,
    /// Index `n` of the first `x_n` whose image is infinite.
    pub singular_hit: Option<usize>,
}

impl WalkRecord {
    /// Increments `phi(x0, n + 1) - phi(x0, n)`.
    pub fn increments(&self) -> Vec<i64> {
        self.cocycle.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// State of the skew product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewState {
    /// Fractional coordinate in `[0, 1]`.
    pub x: f64,
    /// Integer coordinate.
    pub m: i64,
}

/// One step of the skew product; `None` in the jump slot marks a singular image.
///
/// On a singular image the fractional coordinate is sent to 0 and `m` is kept.
#[inline]
pub fn skew_step(map: &ShiftPeriodicMap, s: SkewState) -> (SkewState, Option<i64>) {
    match map.eval_unit(s.x) {
        ExtendedReal::Finite(v) => {
            let (k, r) = math::split_floor(v);
            let k = k as i64;
            (SkewState { x: r, m: s.m + k }, Some(k))
        }
        _ => (SkewState { x: 0.0, m: s.m }, None),
    }
}

/// Iterates the map `n` times from `x0` in `[0, 1]`.
pub fn iterate(map: &ShiftPeriodicMap, x0: f64, n: usize) -> Result<WalkRecord> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::param("x0", alloc::format!("{x0} is outside [0, 1]")));
    }
    let mut positions = Vec::with_capacity(n + 1);
    let mut fractional = Vec::with_capacity(n + 1);
    let mut cocycle = Vec::with_capacity(n + 1);
    let mut singular_hit = None;
    let mut s = SkewState { x: x0, m: 0 };
    let mut escaped = 0.0;
    positions.push(x0);
    fractional.push(x0);
    cocycle.push(0);
    for k in 0..n {
        let (next, jump) = skew_step(map, s);
        if jump.is_none() && singular_hit.is_none() {
            singular_hit = Some(k);
            escaped = map.eval_unit(s.x).to_f64();
        }
        s = next;
        fractional.push(s.x);
        if singular_hit.is_some() {
            cocycle.push(0);
            positions.push(escaped);
        } else {
            cocycle.push(s.m);
            positions.push(s.x + s.m as f64);
        }
    }
    Ok(WalkRecord { x0, positions, fractional, cocycle, singular_hit })
}

/// Transition probabilities `p_m = Leb{x in [0, 1]: floor(F(x)) = m}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransitionTable {
    /// `p_m` for `|m| <= truncation_bound`; zero entries are omitted.
    pub entries: BTreeMap<i64, f64>,
    /// Largest `|m|` tabulated.
    pub truncation_bound: u64,
    /// Mass of `|m| > truncation_bound`, including singular points.
    pub tail_mass: f64,
    /// Part of the tail mass with `m > truncation_bound`.
    pub tail_above: f64,
    /// Part of the tail mass with `m < -truncation_bound`.
    pub tail_below: f64,
}

impl TransitionTable {
    /// `p_m`, zero when absent.
    pub fn p(&self, m: i64) -> f64 {
        self.entries.get(&m).copied().unwrap_or(0.0)
    }

    /// Sum of the tabulated entries and the tail.
    pub fn total(&self) -> f64 {
        sum_compensated(self.entries.values().copied()) + self.tail_mass
    }

    /// Mean of the tabulated part.
    pub fn mean(&self) -> f64 {
        sum_compensated(self.entries.iter().map(|(m, p)| *m as f64 * p))
    }

    /// Variance of the tabulated part.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        sum_compensated(self.entries.iter().map(|(m, p)| (*m as f64 - mu) * (*m as f64 - mu) * p))
    }
}

/// A maximal subinterval of a branch on which `floor(F)` is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPiece {
    /// Branch index.
    pub branch: usize,
    /// Left end.
    pub start: BranchCoord,
    /// Right end.
    pub end: BranchCoord,
    /// `floor(F)` on the piece; for tail pieces the first level beyond the bound.
    pub jump: i64,
    /// Whether the piece collects all levels beyond the truncation bound.
    pub tail: bool,
    /// Lebesgue length.
    pub length: f64,
}

/// Splits a branch at the preimages of the integers in `[-bound, bound + 1]`.
///
/// Pieces are returned left to right. Pieces whose level exceeds `bound` in
/// absolute value are merged into at most one tail piece at each end.
pub fn branch_level_pieces(index: usize, b: &MonotoneBranch, bound: u64) -> Result<Vec<LevelPiece>> {
    let bound = bound.min(1 << 52) as i64;
    let (l, r) = (b.left_limit().to_f64(), b.right_limit().to_f64());
    let inc = b.orientation() == Orientation::Increasing;
    let (vmin, vmax) = if inc { (l, r) } else { (r, l) };
    let first = if vmin.is_finite() { (math::floor(vmin) as i64 + 1).max(-bound) } else { -bound };
    let last = if vmax.is_finite() { (libm::ceil(vmax) as i64 - 1).min(bound + 1) } else { bound + 1 };
    let mut levels: Vec<i64> = if first <= last { (first..=last).collect() } else { Vec::new() };
    if !inc {
        levels.reverse();
    }
    let mut cuts = Vec::with_capacity(levels.len() + 2);
    cuts.push(BranchCoord::FromLo(0.0));
    for &j in &levels {
        cuts.push(b.solve(j as f64)?);
    }
    cuts.push(BranchCoord::FromHi(0.0));
    let base = if vmin.is_finite() { math::floor(vmin) as i64 } else { -bound - 1 };
    let mut out = Vec::with_capacity(cuts.len() - 1);
    for k in 0..cuts.len() - 1 {
        let jump = if levels.is_empty() {
            base
        } else if inc {
            if k == 0 {
                levels[0] - 1
            } else {
                levels[k - 1]
            }
        } else if k == 0 {
            levels[0]
        } else {
            levels[k - 1] - 1
        };
        let length = b.length_between(cuts[k], cuts[k + 1]);
        out.push(LevelPiece {
            branch: index,
            start: cuts[k],
            end: cuts[k + 1],
            jump,
            tail: jump.abs() > bound,
            length,
        });
    }
    Ok(out)
}

/// Exact transition probabilities for `|m| <= bound`.
///
/// Each branch is cut at the preimages of the integers and the pieces are
/// measured in local coordinates, so masses below the spacing of doubles near
/// a singularity still count. The rest goes to the tail.
pub fn transition_table(map: &ShiftPeriodicMap, bound: u64) -> Result<TransitionTable> {
    let mut acc: BTreeMap<i64, KahanSum> = BTreeMap::new();
    let (mut above, mut below) = (KahanSum::default(), KahanSum::default());
    for (i, b) in map.branches().iter().enumerate() {
        for piece in branch_level_pieces(i, b, bound)? {
            if piece.tail {
                if piece.jump > 0 {
                    above.add(piece.length);
                } else {
                    below.add(piece.length);
                }
            } else {
                acc.entry(piece.jump).or_default().add(piece.length);
            }
        }
    }
    let entries = acc.into_iter().map(|(m, s)| (m, s.value())).filter(|(_, p)| *p > 0.0).collect();
    let (tail_above, tail_below) = (above.value(), below.value());
    Ok(TransitionTable { entries, truncation_bound: bound, tail_mass: tail_above + tail_below, tail_above, tail_below })
}

/// Empirical frequencies of `floor(F(x))` for `x` drawn from `sampler`.
///
/// Singular images go to the tail. The truncation bound is the largest
/// `|m|` observed.
pub fn empirical_transitions(map: &ShiftPeriodicMap, sampler: &dyn UnitSampler, n_samples: usize, seed: u64) -> Result<TransitionTable> {
    if n_samples == 0 {
        return Err(Error::InsufficientData("no samples requested".into()));
    }
    let mut rng = path_rng(seed, 0);
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    let (mut above, mut below) = (0u64, 0u64);
    for _ in 0..n_samples {
        match map.eval_unit(sampler.sample(&mut rng)) {
            ExtendedReal::Finite(v) => *counts.entry(math::floor(v) as i64).or_default() += 1,
            ExtendedReal::PosInf => above += 1,
            ExtendedReal::NegInf => below += 1,
        }
    }
    let n = n_samples as f64;
    let bound = counts.keys().map(|m| m.unsigned_abs()).max().unwrap_or(0);
    Ok(TransitionTable {
        entries: counts.into_iter().map(|(m, c)| (m, c as f64 / n)).collect(),
        truncation_bound: bound,
        tail_mass: (above + below) as f64 / n,
        tail_above: above as f64 / n,
        tail_below: below as f64 / n,
    })
}

/// `Leb{x in [0, 1]: F(x) >= y}`, measured in local coordinates.
pub fn upper_tail(map: &ShiftPeriodicMap, y: f64) -> Result<f64> {
    let mut s = KahanSum::default();
    for b in map.branches() {
        let (l, r) = (b.left_limit().to_f64(), b.right_limit().to_f64());
        if l.min(r) >= y {
            s.add(b.width());
        } else if b.image_contains(y) {
            let c = b.solve(y)?;
            let inc = b.orientation() == Orientation::Increasing;
            s.add(if inc { b.length_between(c, BranchCoord::FromHi(0.0)) } else { b.length_between(BranchCoord::FromLo(0.0), c) });
        }
    }
    Ok(s.value())
}

/// `Leb{x in [0, 1]: F(x) < y}`.
pub fn lower_tail(map: &ShiftPeriodicMap, y: f64) -> Result<f64> {
    let mut s = KahanSum::default();
    for b in map.branches() {
        let (l, r) = (b.left_limit().to_f64(), b.right_limit().to_f64());
        if l.max(r) <= y {
            s.add(b.width());
        } else if b.image_contains(y) {
            let c = b.solve(y)?;
            let inc = b.orientation() == Orientation::Increasing;
            s.add(if inc { b.length_between(BranchCoord::FromLo(0.0), c) } else { b.length_between(c, BranchCoord::FromHi(0.0)) });
        }
    }
    Ok(s.value())
}

/// Power-law fit `P(+-Y > M) ~ c_+- M^{-kappa}` of the jump tails.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TailFit {
    /// Both tails vanish beyond the fitting range.
    LightTailed,
    /// Fitted power law.
    PowerLaw {
        /// Common exponent, fitted on both tails together.
        kappa: f64,
        /// Constant of the upper tail.
        c_plus: f64,
        /// Constant of the lower tail.
        c_minus: f64,
    },
}

/// Fits the jump tails on `points` log-spaced levels in `[m_lo, m_hi]`.
///
/// The exponent comes from a least-squares fit of `log P(|Y| > M)` against
/// `log M`; each constant is the geometric mean of `P(+-Y > M) M^kappa`.
pub fn tail_constants(map: &ShiftPeriodicMap, m_lo: f64, m_hi: f64, points: usize) -> Result<TailFit> {
    if !(1.0 <= m_lo && m_lo < m_hi) || points < 2 {
        return Err(Error::param("m_range", "need 1 <= m_lo < m_hi and at least two points"));
    }
    let mut samples = Vec::with_capacity(points);
    for k in 0..points {
        let m = libm::floor(m_lo * math::pow(m_hi / m_lo, k as f64 / (points - 1) as f64));
        let up = upper_tail(map, m + 1.0)?;
        let down = lower_tail(map, -m)?;
        samples.push((m, up, down));
    }
    if samples.iter().all(|s| s.1 == 0.0 && s.2 == 0.0) {
        return Ok(TailFit::LightTailed);
    }
    let pts: Vec<(f64, f64)> = samples.iter().filter(|s| s.1 + s.2 > 0.0).map(|s| (math::log(s.0), math::log(s.1 + s.2))).collect();
    if pts.len() < 2 {
        return Ok(TailFit::LightTailed);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let kappa = -sxy / sxx;
    let constant = |pick: fn(&(f64, f64, f64)) -> f64| {
        let logs: Vec<f64> = samples.iter().filter(|s| pick(s) > 0.0).map(|s| math::log(pick(s)) + kappa * math::log(s.0)).collect();
        if logs.is_empty() {
            0.0
        } else {
            math::exp(logs.iter().sum::<f64>() / logs.len() as f64)
        }
    };
    Ok(TailFit::PowerLaw { kappa, c_plus: constant(|s| s.1), c_minus: constant(|s| s.2) })
}

/// Increment categories used by the independence test: `<= -2, -1, 0, 1, >= 2`.
pub fn increment_category(m: i64) -> usize {
    (m.clamp(-2, 2) + 2) as usize
}

/// Outcome of a chi-square test of independence on a contingency table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndependenceReport {
    /// Counts of consecutive increment pairs by category.
    pub counts: [[u64; 5]; 5],
    /// Number of pairs.
    pub n_pairs: u64,
    /// Pearson statistic.
    pub statistic: f64,
    /// Likelihood-ratio statistic, reported for comparison.
    pub g_statistic: f64,
    /// Degrees of freedom after dropping empty rows and columns.
    pub df: usize,
    /// Upper 0.1% point of the reference chi-square law.
    pub quantile_999: f64,
    /// Tail probability of the Pearson statistic.
    pub p_value: f64,
    /// Cells whose expected count is below 5.
    pub sparse_cells: usize,
    /// Pearson statistic exceeds the 0.999 quantile.
    pub rejected: bool,
}

/// Pearson test of independence for a 5 x 5 table of counts.
pub fn chi_square_independence(counts: [[u64; 5]; 5]) -> Result<IndependenceReport> {
    let rows: Vec<usize> = (0..5).filter(|&i| counts[i].iter().sum::<u64>() > 0).collect();
    let cols: Vec<usize> = (0..5).filter(|&j| (0..5).map(|i| counts[i][j]).sum::<u64>() > 0).collect();
    if rows.len() < 2 || cols.len() < 2 {
        return Err(Error::InsufficientData("fewer than two non-empty categories".into()));
    }
    let n: u64 = counts.iter().flatten().sum();
    let nf = n as f64;
    let (mut x2, mut g, mut sparse) = (0.0, 0.0, 0);
    for &i in &rows {
        let ri = counts[i].iter().sum::<u64>() as f64;
        for &j in &cols {
            let cj = (0..5).map(|k| counts[k][j]).sum::<u64>() as f64;
            let e = ri * cj / nf;
            let o = counts[i][j] as f64;
            x2 += (o - e) * (o - e) / e;
            if o > 0.0 {
                g += 2.0 * o * math::log(o / e);
            }
            if e < 5.0 {
                sparse += 1;
            }
        }
    }
    let df = (rows.len() - 1) * (cols.len() - 1);
    let q = math::chi_square_quantile(0.999, df as f64);
    Ok(IndependenceReport {
        counts,
        n_pairs: n,
        statistic: x2,
        g_statistic: g,
        df,
        quantile_999: q,
        p_value: math::chi_square_sf(x2, df as f64),
        sparse_cells: sparse,
        rejected: x2 > q,
    })
}

/// Tests whether consecutive increments of the walk are independent.
///
/// Each path starts from `sampler` and runs `n_steps` steps; every pair of
/// consecutive increments is tallied by category and the table goes through
/// [`chi_square_independence`]. Paths that hit a singularity stop there.
pub fn increment_independence_test(
    map: &ShiftPeriodicMap,
    sampler: &dyn UnitSampler,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<IndependenceReport> {
    if n_steps < 2 || n_paths == 0 {
        return Err(Error::InsufficientData("need at least two steps and one path".into()));
    }
    let mut counts = [[0u64; 5]; 5];
    for p in 0..n_paths {
        let mut rng = path_rng(seed, p as u64);
        tally_pairs(map, sampler.sample(&mut rng), n_steps, &mut counts);
    }
    chi_square_independence(counts)
}

/// Adds the consecutive-increment pairs of one orbit to `counts`.
pub fn tally_pairs(map: &ShiftPeriodicMap, x0: f64, n_steps: usize, counts: &mut [[u64; 5]; 5]) {
    let mut s = SkewState { x: x0, m: 0 };
    let mut prev: Option<i64> = None;
    for _ in 0..n_steps {
        let (next, jump) = skew_step(map, s);
        let Some(j) = jump else { break };
        if let Some(q) = prev {
            counts[increment_category(q)][increment_category(j)] += 1;
        }
        prev = Some(j);
        s = next;
    }
}
