//! Shift-periodic maps built from monotone branches on `[0, 1]`.
//!
//! A map is stored through its restriction to `[0, 1]` and extended by
//! `F(x) = F({x}) + floor(x)`. Each branch is strictly monotone on an open
//! subinterval and may diverge to `+-inf` at its ends. Branch values are
//! evaluated at a [`BranchPoint`], which carries the distances to both ends so
//! that tails near a singularity keep full relative precision.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Add;

use crate::math::{self, bisect_bits};
use crate::{Error, Result};

pub mod builtin;
mod validate;

pub use validate::{validate, Condition, ValidationReport, Violation};

/// Distance to a singularity below which the symbolic infinity is returned.
pub const SINGULAR_EPS: f64 = 1e-300;

/// A real number or one of the two signed infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ExtendedReal {
    /// A finite value.
    Finite(f64),
    /// `+inf`.
    PosInf,
    /// `-inf`.
    NegInf,
}

impl ExtendedReal {
    /// Wraps an `f64`, mapping IEEE infinities to the symbolic ones.
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(v)
        }
    }

    /// The value as an `f64`, with infinities mapped to IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInf => f64::INFINITY,
            ExtendedReal::NegInf => f64::NEG_INFINITY,
        }
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Whether the value is finite.
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }
}

impl Add<f64> for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: f64) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v + rhs),
            other => other,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInf => f.write_str("+inf"),
            ExtendedReal::NegInf => f.write_str("-inf"),
        }
    }
}

/// Direction of a monotone branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Orientation {
    /// Strictly increasing.
    Increasing,
    /// Strictly decreasing.
    Decreasing,
}

/// A point inside a branch together with its distances to both branch ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    /// The point itself.
    pub x: f64,
    /// `x - lo`, exact even when it is far below the spacing of doubles near `x`.
    pub from_lo: f64,
    /// `hi - x`, exact in the same sense.
    pub from_hi: f64,
}

/// Position inside a branch measured from one of its ends.
///
/// Points close to a singular end cannot be told apart in absolute
/// coordinates, so crossings and cylinder ends are stored this way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchCoord {
    /// Distance from the left end.
    FromLo(f64),
    /// Distance from the right end.
    FromHi(f64),
}

/// One affine piece `y = slope * x + intercept` on `[lo, hi]`.
///
/// `y_lo` and `y_hi` hold the end values. Builtins set them from closed forms
/// so that images of breakpoints land exactly where the formulas put them.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffinePiece {
    /// Left end.
    pub lo: f64,
    /// Right end.
    pub hi: f64,
    /// Slope, never zero.
    pub slope: f64,
    /// Intercept.
    pub intercept: f64,
    /// Value at `lo`.
    pub y_lo: f64,
    /// Value at `hi`.
    pub y_hi: f64,
}

impl AffinePiece {
    /// Piece with end values computed from the formula.
    pub fn new(lo: f64, hi: f64, slope: f64, intercept: f64) -> Self {
        AffinePiece { lo, hi, slope, intercept, y_lo: slope * lo + intercept, y_hi: slope * hi + intercept }
    }

    /// Piece with end values supplied by the caller.
    pub fn with_ends(lo: f64, hi: f64, slope: f64, intercept: f64, y_lo: f64, y_hi: f64) -> Self {
        AffinePiece { lo, hi, slope, intercept, y_lo, y_hi }
    }

    /// Value at `x`, exact at the ends.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x == self.lo {
            self.y_lo
        } else if x == self.hi {
            self.y_hi
        } else {
            self.slope * x + self.intercept
        }
    }
}

type BranchClosure = dyn Fn(BranchPoint) -> f64 + Send + Sync;

/// How a branch computes its values.
#[derive(Clone)]
pub enum BranchFn {
    /// Continuous piecewise affine function; the pieces tile the branch.
    Linear(Vec<AffinePiece>),
    /// Arbitrary closure; may return `+-inf` at singular points.
    Func(Arc<BranchClosure>),
}

impl fmt::Debug for BranchFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchFn::Linear(p) => f.debug_tuple("Linear").field(p).finish(),
            BranchFn::Func(_) => f.write_str("Func(..)"),
        }
    }
}

/// A strictly monotone branch on the open interval `(lo, hi)`.
#[derive(Debug, Clone)]
pub struct MonotoneBranch {
    lo: f64,
    hi: f64,
    orientation: Orientation,
    left_limit: ExtendedReal,
    right_limit: ExtendedReal,
    func: BranchFn,
}

impl MonotoneBranch {
    /// Branch given by a single affine function.
    pub fn affine(lo: f64, hi: f64, slope: f64, intercept: f64) -> Result<Self> {
        Self::piecewise_affine(alloc::vec![AffinePiece::new(lo, hi, slope, intercept)])
    }

    /// Branch given by contiguous affine pieces of a common slope sign.
    pub fn piecewise_affine(pieces: Vec<AffinePiece>) -> Result<Self> {
        let first = pieces.first().ok_or_else(|| Error::Cover("branch without pieces".into()))?;
        let last = pieces[pieces.len() - 1];
        let sign = first.slope > 0.0;
        for w in pieces.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::Cover(alloc::format!("pieces meet at {} and {}", w[0].hi, w[1].lo)));
            }
        }
        for p in &pieces {
            if !(p.lo < p.hi) || p.slope == 0.0 || (p.slope > 0.0) != sign || !p.slope.is_finite() {
                return Err(Error::Condition(alloc::format!("piece on [{}, {}] is not strictly monotone", p.lo, p.hi)));
            }
        }
        let orientation = if sign { Orientation::Increasing } else { Orientation::Decreasing };
        Ok(MonotoneBranch {
            lo: first.lo,
            hi: last.hi,
            orientation,
            left_limit: ExtendedReal::Finite(first.y_lo),
            right_limit: ExtendedReal::Finite(last.y_hi),
            func: BranchFn::Linear(pieces),
        })
    }

    /// Branch given by a closure together with its declared one-sided limits.
    pub fn from_fn(
        lo: f64,
        hi: f64,
        orientation: Orientation,
        left_limit: ExtendedReal,
        right_limit: ExtendedReal,
        f: impl Fn(BranchPoint) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Cover(alloc::format!("empty branch [{lo}, {hi}]")));
        }
        let f: Box<BranchClosure> = Box::new(f);
        Ok(MonotoneBranch { lo, hi, orientation, left_limit, right_limit, func: BranchFn::Func(Arc::from(f)) })
    }

    /// Left end of the branch interval.
    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// Right end of the branch interval.
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Width `hi - lo`.
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Direction of monotonicity.
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Limit of the branch at `lo` from the right.
    pub fn left_limit(&self) -> ExtendedReal {
        self.left_limit
    }

    /// Limit of the branch at `hi` from the left.
    pub fn right_limit(&self) -> ExtendedReal {
        self.right_limit
    }

    /// The value representation.
    pub fn func(&self) -> &BranchFn {
        &self.func
    }

    /// Affine pieces, when the branch is piecewise affine.
    pub fn pieces(&self) -> Option<&[AffinePiece]> {
        match &self.func {
            BranchFn::Linear(p) => Some(p),
            BranchFn::Func(_) => None,
        }
    }

    /// Point at a local coordinate.
    #[inline]
    pub fn point(&self, c: BranchCoord) -> BranchPoint {
        let w = self.width();
        match c {
            BranchCoord::FromLo(s) => BranchPoint { x: self.lo + s, from_lo: s, from_hi: w - s },
            BranchCoord::FromHi(s) => BranchPoint { x: self.hi - s, from_lo: w - s, from_hi: s },
        }
    }

    /// Point at an absolute position inside the branch.
    #[inline]
    pub fn point_at(&self, x: f64) -> BranchPoint {
        BranchPoint { x, from_lo: x - self.lo, from_hi: self.hi - x }
    }

    /// Absolute position of a local coordinate.
    #[inline]
    pub fn x_of(&self, c: BranchCoord) -> f64 {
        self.point(c).x
    }

    /// Branch value at a point; the ends return the declared limits.
    pub fn eval_point(&self, p: BranchPoint) -> ExtendedReal {
        if p.from_lo <= 0.0 || (p.from_lo < SINGULAR_EPS && !self.left_limit.is_finite()) {
            return self.left_limit;
        }
        if p.from_hi <= 0.0 || (p.from_hi < SINGULAR_EPS && !self.right_limit.is_finite()) {
            return self.right_limit;
        }
        match &self.func {
            BranchFn::Linear(pieces) => {
                let i = pieces.partition_point(|q| q.hi <= p.x).min(pieces.len() - 1);
                ExtendedReal::Finite(pieces[i].eval(p.x))
            }
            BranchFn::Func(f) => {
                let v = f(p);
                if v.is_nan() {
                    // Only reachable through overflow right at a singular end.
                    if p.from_lo <= p.from_hi {
                        self.left_limit
                    } else {
                        self.right_limit
                    }
                } else {
                    ExtendedReal::from_f64(v)
                }
            }
        }
    }

    /// Branch value at a local coordinate.
    #[inline]
    pub fn eval_coord(&self, c: BranchCoord) -> ExtendedReal {
        self.eval_point(self.point(c))
    }

    /// Lebesgue length between two coordinates, `a` to the left of `b`.
    pub fn length_between(&self, a: BranchCoord, b: BranchCoord) -> f64 {
        let w = self.width();
        match (a, b) {
            (BranchCoord::FromLo(s), BranchCoord::FromLo(t)) => t - s,
            (BranchCoord::FromHi(s), BranchCoord::FromHi(t)) => s - t,
            (BranchCoord::FromLo(s), BranchCoord::FromHi(t)) => w - s - t,
            (BranchCoord::FromHi(s), BranchCoord::FromLo(t)) => t - (w - s),
        }
    }

    /// Whether the value `y` lies strictly between the two end limits.
    pub fn image_contains(&self, y: f64) -> bool {
        let (a, b) = (self.left_limit.to_f64(), self.right_limit.to_f64());
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        lo < y && y < hi
    }

    /// Solves `F(x) = y` inside the branch.
    ///
    /// Affine pieces are inverted in closed form. Other branches are searched on
    /// the bit patterns of the distance to the nearer end, which reaches
    /// adjacent doubles even inside tails of width `1e-200`.
    pub fn solve(&self, y: f64) -> Result<BranchCoord> {
        if !self.image_contains(y) {
            return Err(Error::RootSearch(alloc::format!(
                "value {y} outside branch image ({}, {})",
                self.left_limit,
                self.right_limit
            )));
        }
        let inc = self.orientation == Orientation::Increasing;
        if let BranchFn::Linear(pieces) = &self.func {
            for q in pieces {
                let (a, b) = if q.y_lo < q.y_hi { (q.y_lo, q.y_hi) } else { (q.y_hi, q.y_lo) };
                if a <= y && y <= b {
                    let x = if y == q.y_lo {
                        q.lo
                    } else if y == q.y_hi {
                        q.hi
                    } else {
                        ((y - q.intercept) / q.slope).clamp(q.lo, q.hi)
                    };
                    return Ok(if x - self.lo <= self.hi - x {
                        BranchCoord::FromLo(x - self.lo)
                    } else {
                        BranchCoord::FromHi(self.hi - x)
                    });
                }
            }
            return Err(Error::RootSearch(alloc::format!("no affine piece attains {y}")));
        }
        let half = 0.5 * self.width();
        let mid = self.eval_coord(BranchCoord::FromLo(half)).to_f64();
        // "above" means the value is on the far side of y when walking from lo.
        let beyond = |v: f64| if inc { v >= y } else { v <= y };
        if beyond(mid) {
            let s = bisect_bits(0.0, half, |s| beyond(self.eval_coord(BranchCoord::FromLo(s)).to_f64()));
            Ok(BranchCoord::FromLo(s))
        } else {
            // Walking inward from hi the predicate flips when the value is no longer beyond y.
            let s = bisect_bits(0.0, half, |s| !beyond(self.eval_coord(BranchCoord::FromHi(s)).to_f64()));
            Ok(BranchCoord::FromHi(s))
        }
    }
}

/// A shift-periodic map described by monotone branches tiling `[0, 1]`.
#[derive(Debug, Clone)]
pub struct ShiftPeriodicMap {
    name: String,
    params: Vec<(String, f64)>,
    branches: Vec<MonotoneBranch>,
}

impl ShiftPeriodicMap {
    /// Builds a map; the branches must tile `[0, 1]` in order.
    pub fn new(name: impl Into<String>, params: Vec<(String, f64)>, branches: Vec<MonotoneBranch>) -> Result<Self> {
        check_cover(&branches)?;
        Ok(ShiftPeriodicMap { name: name.into(), params, branches })
    }

    /// Family name.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Parameters the map was built with.
    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    /// Value of a named parameter.
    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Branches in left-to-right order.
    pub fn branches(&self) -> &[MonotoneBranch] {
        &self.branches
    }

    /// Whether every branch is piecewise affine.
    pub fn is_piecewise_affine(&self) -> bool {
        self.branches.iter().all(|b| b.pieces().is_some())
    }

    /// Index of the branch containing `x` in `[0, 1)`; breakpoints go to the right.
    #[inline]
    pub fn branch_index(&self, x: f64) -> usize {
        self.branches.partition_point(|b| b.lo <= x).saturating_sub(1)
    }

    /// `F(x)` for `x` in `[0, 1]`.
    ///
    /// At a breakpoint the right-hand branch's limit is used: the closure value
    /// when finite, the symbolic infinity otherwise.
    #[inline]
    pub fn eval_unit(&self, x: f64) -> ExtendedReal {
        if x >= 1.0 {
            return self.eval_unit(x - 1.0) + 1.0;
        }
        let b = &self.branches[self.branch_index(x)];
        if x == b.lo {
            return b.left_limit;
        }
        b.eval_point(b.point_at(x))
    }

    /// `F(x) = F({x}) + floor(x)` for any real `x`.
    pub fn eval(&self, x: f64) -> ExtendedReal {
        let (k, r) = math::split_floor(x);
        self.eval_unit(r) + k
    }

    /// Restricted map `F_r(x) = {F(x)}`, with `F_r(x) = 0` where `F(x)` is infinite.
    pub fn eval_restricted(&self, x: f64) -> f64 {
        match self.eval(x) {
            ExtendedReal::Finite(v) => math::fract(v),
            _ => 0.0,
        }
    }

    /// Smallest and largest values of `F` on `[0, 1]`, read off the branch limits.
    pub fn image_bounds(&self) -> (ExtendedReal, ExtendedReal) {
        let mut lo = ExtendedReal::PosInf;
        let mut hi = ExtendedReal::NegInf;
        for b in &self.branches {
            for v in [b.left_limit, b.right_limit] {
                if v < lo {
                    lo = v;
                }
                if v > hi {
                    hi = v;
                }
            }
        }
        (lo, hi)
    }

    /// Breakpoints `0 = t_0 < ... < t_k = 1` of the branch partition.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.branches.iter().map(|b| b.lo).collect();
        v.push(1.0);
        v
    }
}

fn check_cover(branches: &[MonotoneBranch]) -> Result<()> {
    let first = branches.first().ok_or_else(|| Error::Cover("no branches".into()))?;
    if first.lo != 0.0 {
        return Err(Error::Cover(alloc::format!("first branch starts at {}", first.lo)));
    }
    let last = &branches[branches.len() - 1];
    if last.hi != 1.0 {
        return Err(Error::Cover(alloc::format!("last branch ends at {}", last.hi)));
    }
    for w in branches.windows(2) {
        if w[0].hi != w[1].lo {
            return Err(Error::Cover(alloc::format!("gap or overlap between {} and {}", w[0].hi, w[1].lo)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
