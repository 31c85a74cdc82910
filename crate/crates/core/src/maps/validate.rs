use alloc::string::String;
use alloc::vec::Vec;

use super::{BranchCoord, ExtendedReal, MonotoneBranch, Orientation, ShiftPeriodicMap};
use crate::math::dist_to_int;
use crate::{Error, Result};

/// The structural conditions checked by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Condition {
    /// The branches tile `[0, 1]`.
    Cover,
    /// Each branch is strictly monotone.
    Monotone,
    /// Each branch expands distances.
    Expansion,
    /// One-sided limits at the breakpoints are integers or infinite.
    IntegerLimit,
    /// Declared limits agree with the values near the ends.
    LimitConsistency,
}

/// A failed condition together with a point that exhibits the failure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    /// Which condition failed.
    pub condition: Condition,
    /// Branch index.
    pub branch: usize,
    /// A point where the failure is visible.
    pub witness: f64,
    /// Human-readable explanation.
    pub detail: String,
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    /// Cover, monotonicity and limit consistency hold.
    pub is_shift_periodic: bool,
    /// Additionally every branch expands and all limits are integers or infinite.
    pub has_integer_spikes: bool,
    /// All violations found, at most one per condition and branch.
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// Whether a condition was violated anywhere.
    pub fn violates(&self, c: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == c)
    }
}

/// Checks monotonicity, expansion and the integer-limit condition on a grid.
///
/// Every branch is sampled at `grid_n` interior points. Consecutive samples
/// must move in the declared direction and by more than their distance, and
/// finite end limits must lie within `tol` of an integer. Declared limits are
/// compared with a linear extrapolation from two points next to each end.
pub fn validate(map: &ShiftPeriodicMap, grid_n: usize, tol: f64) -> Result<ValidationReport> {
    if grid_n < 2 {
        return Err(Error::param("grid_n", "need at least two grid points"));
    }
    let mut violations = Vec::new();
    if let Err(e) = super::check_cover(map.branches()) {
        violations.push(Violation { condition: Condition::Cover, branch: 0, witness: 0.0, detail: alloc::format!("{e}") });
    }
    for (i, b) in map.branches().iter().enumerate() {
        check_branch(i, b, grid_n, tol, &mut violations);
    }
    let structural = [Condition::Cover, Condition::Monotone, Condition::LimitConsistency];
    let is_shift_periodic = !violations.iter().any(|v| structural.contains(&v.condition));
    let has_integer_spikes = is_shift_periodic && violations.is_empty();
    Ok(ValidationReport { is_shift_periodic, has_integer_spikes, violations })
}

fn check_branch(i: usize, b: &MonotoneBranch, grid_n: usize, tol: f64, out: &mut Vec<Violation>) {
    let w = b.width();
    let xs: Vec<f64> = (1..=grid_n).map(|k| w * k as f64 / (grid_n + 1) as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&s| b.eval_coord(BranchCoord::FromLo(s)).to_f64()).collect();
    let sign = if b.orientation() == Orientation::Increasing { 1.0 } else { -1.0 };
    let push = |out: &mut Vec<Violation>, c: Condition, x: f64, detail: String| {
        if !out.iter().any(|v| v.condition == c && v.branch == i) {
            out.push(Violation { condition: c, branch: i, witness: x, detail });
        }
    };
    for k in 0..grid_n {
        if !vs[k].is_finite() {
            push(out, Condition::Monotone, b.lo() + xs[k], alloc::format!("value {} inside the branch", vs[k]));
        }
    }
    for stride in [1, 7, grid_n / 3] {
        if stride == 0 || stride >= grid_n {
            continue;
        }
        for k in 0..grid_n - stride {
            let (x0, x1) = (xs[k], xs[k + stride]);
            let dv = sign * (vs[k + stride] - vs[k]);
            if !(dv > 0.0) {
                push(out, Condition::Monotone, b.lo() + x0, alloc::format!("F does not move in the declared direction on [{}, {}]", b.lo() + x0, b.lo() + x1));
            } else if !(dv > x1 - x0) {
                push(out, Condition::Expansion, b.lo() + x0, alloc::format!("|F(y) - F(x)| = {dv:e} <= |y - x| = {:e}", x1 - x0));
            }
        }
    }
    for (end, limit, x_end) in [(0, b.left_limit(), b.lo()), (1, b.right_limit(), b.hi())] {
        if let ExtendedReal::Finite(l) = limit {
            if dist_to_int(l) > tol {
                push(out, Condition::IntegerLimit, x_end, alloc::format!("one-sided limit {l} at {x_end} is not an integer"));
            }
        }
        let h = w * 1e-6;
        let c = |s: f64| if end == 0 { BranchCoord::FromLo(s) } else { BranchCoord::FromHi(s) };
        let v1 = b.eval_coord(c(h)).to_f64();
        let v2 = b.eval_coord(c(2.0 * h)).to_f64();
        let consistent = match limit {
            ExtendedReal::Finite(l) => (2.0 * v1 - v2 - l).abs() <= 1e-5 * (1.0 + l.abs()),
            ExtendedReal::PosInf => v1 > v2,
            ExtendedReal::NegInf => v1 < v2,
        };
        if !consistent {
            push(out, Condition::LimitConsistency, x_end, alloc::format!("declared limit {limit} at {x_end} but nearby values are {v2} and {v1}"));
        }
    }
}
