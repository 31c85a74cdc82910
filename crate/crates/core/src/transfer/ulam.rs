use alloc::vec::Vec;

use super::density::PiecewiseConstantDensity;
use crate::maps::{BranchFn, MonotoneBranch, ShiftPeriodicMap};
use crate::math::{ceil, floor, KahanSum};
use crate::{Error, Result};

/// Residual below which power iteration stops.
pub const POWER_TOL: f64 = 1e-12;
/// Iteration cap of the power method.
pub const POWER_MAX_ITER: usize = 100_000;
/// Secant pieces per cell for branches given by closures.
pub const SUBSAMPLES: usize = 64;

/// One row of the Ulam matrix: the fractions of a cell sent to each cell.
///
/// Mass whose image wraps around the circle whole is kept in `uniform`; it is
/// spread over the cells in proportion to their lengths.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UlamRow {
    /// `(target cell, fraction)` pairs sorted by target.
    pub entries: Vec<(usize, f64)>,
    /// Fraction spread like Lebesgue measure.
    pub uniform: f64,
}

impl UlamRow {
    /// Sum of all fractions.
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum::<f64>() + self.uniform
    }
}

/// Ulam discretization of the transfer operator of `F_r` and its stationary vector.
#[derive(Debug, Clone)]
pub struct UlamApproximation {
    breaks: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    uniform: Vec<f64>,
    stationary: Vec<f64>,
    iterations: usize,
    residual: f64,
}

impl UlamApproximation {
    /// Assembles the matrix from precomputed rows and runs the power method.
    pub fn from_rows(breaks: Vec<f64>, rows: Vec<UlamRow>) -> Result<Self> {
        if rows.len() + 1 != breaks.len() {
            return Err(Error::DensityShape("one row per cell is required".into()));
        }
        let mut a = UlamApproximation {
            row_ptr: Vec::with_capacity(rows.len() + 1),
            cols: Vec::new(),
            vals: Vec::new(),
            uniform: Vec::with_capacity(rows.len()),
            stationary: Vec::new(),
            iterations: 0,
            residual: f64::INFINITY,
            breaks,
        };
        a.row_ptr.push(0);
        for r in rows {
            for (j, v) in r.entries {
                a.cols.push(j);
                a.vals.push(v);
            }
            a.uniform.push(r.uniform);
            a.row_ptr.push(a.cols.len());
        }
        a.power_iterate()?;
        Ok(a)
    }

    fn power_iterate(&mut self) -> Result<()> {
        let mut v: Vec<f64> = self.breaks.windows(2).map(|w| w[1] - w[0]).collect();
        for it in 1..=POWER_MAX_ITER {
            let mut next = self.apply(&v);
            let total: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= total);
            let res: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            if res < POWER_TOL {
                self.iterations = it;
                self.residual = res;
                self.stationary = v;
                return Ok(());
            }
            self.residual = res;
        }
        Err(Error::NoConvergence { iterations: POWER_MAX_ITER, residual: self.residual })
    }

    /// Row vector times matrix.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; v.len()];
        let mut spread = KahanSum::default();
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[k]] += vi * self.vals[k];
            }
            spread.add(vi * self.uniform[i]);
        }
        let spread = spread.value();
        if spread != 0.0 {
            for (o, w) in out.iter_mut().zip(self.breaks.windows(2)) {
                *o += spread * (w[1] - w[0]);
            }
        }
        out
    }

    /// Number of cells.
    pub fn grid_n(&self) -> usize {
        self.breaks.len() - 1
    }

    /// Cell boundaries.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Stationary probability of each cell.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Power iterations used.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// L1 change in the last power iteration.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_error(&self) -> f64 {
        (0..self.grid_n())
            .map(|i| {
                let s: f64 = self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum::<f64>() + self.uniform[i];
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// L1 norm of `v P - v` for the stationary vector.
    pub fn stationarity_error(&self) -> f64 {
        let next = self.apply(&self.stationary);
        next.iter().zip(&self.stationary).map(|(a, b)| (a - b).abs()).sum()
    }

    /// The stationary vector as a density.
    pub fn density(&self) -> PiecewiseConstantDensity {
        let values = self.stationary.iter().zip(self.breaks.windows(2)).map(|(p, w)| p / (w[1] - w[0])).collect();
        PiecewiseConstantDensity::new(self.breaks.clone(), values).expect("stationary vector is a valid density")
    }
}

/// Adds `w` per unit length of the fractional parts of `[y1, y2]` to `acc`.
fn distribute(breaks: &[f64], y1: f64, y2: f64, w: f64, acc: &mut Vec<(usize, f64)>, uniform: &mut f64) {
    let (lo_int, hi_int) = (floor(y1), ceil(y2));
    let span = hi_int - lo_int;
    if span <= 1.0 {
        deposit(breaks, y1 - lo_int, y2 - lo_int, w, acc);
        return;
    }
    deposit(breaks, y1 - lo_int, 1.0, w, acc);
    deposit(breaks, 0.0, y2 - (hi_int - 1.0), w, acc);
    *uniform += (span - 2.0) * w;
}

fn deposit(breaks: &[f64], s: f64, e: f64, w: f64, acc: &mut Vec<(usize, f64)>) {
    if !(e > s) {
        return;
    }
    let n = breaks.len() - 1;
    let mut j = breaks.partition_point(|b| *b <= s).saturating_sub(1).min(n - 1);
    while j < n && breaks[j] < e {
        let len = breaks[j + 1].min(e) - breaks[j].max(s);
        if len > 0.0 {
            acc.push((j, w * len));
        }
        j += 1;
    }
}

fn branch_value(b: &MonotoneBranch, x: f64) -> f64 {
    if x <= b.lo() {
        b.left_limit().to_f64()
    } else if x >= b.hi() {
        b.right_limit().to_f64()
    } else {
        b.eval_point(b.point_at(x)).to_f64()
    }
}

/// Row `i` of the Ulam matrix of `F_r` on the partition `breaks`.
///
/// Overlaps are exact for affine pieces; other branches are replaced by
/// [`SUBSAMPLES`] secants per cell, and a secant touching an infinite limit
/// spreads its mass uniformly.
pub fn ulam_row(map: &ShiftPeriodicMap, breaks: &[f64], i: usize) -> UlamRow {
    let (a, b) = (breaks[i], breaks[i + 1]);
    let width = b - a;
    let mut acc = Vec::new();
    let mut uniform = 0.0;
    for br in map.branches() {
        let (s, e) = (a.max(br.lo()), b.min(br.hi()));
        if !(e > s) {
            continue;
        }
        match br.func() {
            BranchFn::Linear(pieces) => {
                for p in pieces {
                    let (s, e) = (s.max(p.lo), e.min(p.hi));
                    if e > s {
                        let (y1, y2) = (p.eval(s), p.eval(e));
                        let (y1, y2) = if y1 < y2 { (y1, y2) } else { (y2, y1) };
                        distribute(breaks, y1, y2, 1.0 / (p.slope.abs() * width), &mut acc, &mut uniform);
                    }
                }
            }
            BranchFn::Func(_) => {
                let h = (e - s) / SUBSAMPLES as f64;
                let mut x0 = s;
                let mut y0 = branch_value(br, s);
                for k in 1..=SUBSAMPLES {
                    let x1 = if k == SUBSAMPLES { e } else { s + h * k as f64 };
                    let y1 = branch_value(br, x1);
                    let frac = (x1 - x0) / width;
                    if !(y0.is_finite() && y1.is_finite()) {
                        uniform += frac;
                    } else if y0 == y1 {
                        let r = y0 - floor(y0);
                        acc.push((breaks.partition_point(|t| *t <= r).saturating_sub(1).min(breaks.len() - 2), frac));
                    } else {
                        let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
                        distribute(breaks, lo, hi, frac / (hi - lo), &mut acc, &mut uniform);
                    }
                    x0 = x1;
                    y0 = y1;
                }
            }
        }
    }
    acc.sort_by_key(|e| e.0);
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(acc.len());
    for (j, v) in acc {
        match entries.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => entries.push((j, v)),
        }
    }
    let mut row = UlamRow { entries, uniform };
    let total = row.total();
    row.entries.iter_mut().for_each(|e| e.1 /= total);
    row.uniform /= total;
    row
}

/// Ulam estimate of the invariant density on an arbitrary partition.
pub fn ulam_on_partition(map: &ShiftPeriodicMap, breaks: Vec<f64>) -> Result<UlamApproximation> {
    if breaks.len() < 3 || breaks[0] != 0.0 || breaks[breaks.len() - 1] != 1.0 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::DensityShape("partition must increase from 0 to 1".into()));
    }
    let rows = (0..breaks.len() - 1).map(|i| ulam_row(map, &breaks, i)).collect();
    UlamApproximation::from_rows(breaks, rows)
}

/// Uniform partition of `[0, 1]` into `n` cells.
pub fn uniform_breaks(n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// Ulam estimate of the invariant density of `F_r` on `grid_n` equal cells.
pub fn ulam_invariant_density(map: &ShiftPeriodicMap, grid_n: usize) -> Result<UlamApproximation> {
    if grid_n < 16 {
        return Err(Error::param("grid_n", alloc::format!("{grid_n} is below 16")));
    }
    ulam_on_partition(map, uniform_breaks(grid_n))
}

/// Uniform grid refined by the branch ends and the first `depth` points of the
/// orbits of the one-sided limits at every branch end.
///
/// The invariant density jumps along these orbits, so cells that respect them
/// resolve layers far thinner than the bulk grid.
pub fn orbit_refined_breaks(map: &ShiftPeriodicMap, grid_n: usize, depth: usize) -> Vec<f64> {
    let mut pts = uniform_breaks(grid_n.max(1));
    pts.extend(map.breakpoints());
    let seeds = map.branches().iter().flat_map(|b| [b.left_limit(), b.right_limit()]);
    for seed in seeds {
        let Some(v) = seed.finite() else { continue };
        let mut y = v - floor(v);
        for _ in 0..depth {
            pts.push(y);
            y = map.eval_restricted(y);
        }
    }
    pts.retain(|y| (0.0..=1.0).contains(y));
    pts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for y in pts {
        match out.last() {
            Some(&last) if y - last <= 1e-15 => {}
            _ => out.push(y),
        }
    }
    if *out.last().unwrap() != 1.0 {
        out.pop();
        out.push(1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::builtin::{example1, example2};
    use crate::maps::{AffinePiece, MonotoneBranch};

    fn doubling() -> ShiftPeriodicMap {
        let b = MonotoneBranch::piecewise_affine(alloc::vec![AffinePiece::new(0.0, 1.0, 2.0, 0.0)]).unwrap();
        ShiftPeriodicMap::new("doubling", Vec::new(), alloc::vec![b]).unwrap()
    }

    #[test]
    fn doubling_map_is_uniform() {
        let u = ulam_invariant_density(&doubling(), 64).unwrap();
        assert!(u.row_sum_error() < 1e-12);
        assert!(u.density().values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn hole_free_example_is_uniform() {
        let u = ulam_invariant_density(&example1(0.0, 0.0).unwrap(), 100).unwrap();
        assert!(u.density().values().iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn stationarity_and_rows() {
        let u = ulam_invariant_density(&example1(0.05, 0.02).unwrap(), 500).unwrap();
        assert!(u.row_sum_error() < 1e-12);
        assert!(u.stationarity_error() < 1e-10);
        assert!((u.density().mass() - 1.0).abs() < 1e-12);
        assert!(ulam_invariant_density(&example1(0.05, 0.02).unwrap(), 8).is_err());
    }

    #[test]
    fn spikes_to_infinity_are_spread() {
        let u = ulam_invariant_density(&example2(2.0).unwrap(), 200).unwrap();
        assert!(u.row_sum_error() < 1e-12);
        assert!(u.stationarity_error() < 1e-10);
        assert!(u.density().values().iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn refined_partition_contains_the_spike_orbits() {
        let eps = 1e-7;
        let m = example1(eps, eps).unwrap();
        let br = orbit_refined_breaks(&m, 100, 10);
        assert!(br.windows(2).all(|w| w[0] < w[1]));
        assert_eq!((br[0], br[br.len() - 1]), (0.0, 1.0));
        assert!(br.iter().any(|y| (y - eps / 4.0).abs() < 1e-15));
        assert!(br.iter().any(|y| (y - (1.0 - eps / 4.0)).abs() < 1e-15));
    }

    #[test]
    fn density_tends_to_one_away_from_the_ends() {
        let d = 0.05;
        let dist: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| {
                let u = ulam_invariant_density(&example1(e, e).unwrap(), 2000).unwrap().density();
                u.sup_distance_to(|_| 1.0, d, 1.0 - d)
            })
            .collect();
        assert!(dist[0] > dist[1] && dist[1] > dist[2], "{dist:?}");
        assert!(dist[2] < 1e-3);
    }
}
