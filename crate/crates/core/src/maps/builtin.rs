//! The map families used throughout the crate.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{AffinePiece, BranchPoint, ExtendedReal, MonotoneBranch, Orientation, ShiftPeriodicMap};
use crate::math::{self, PI};
use crate::{Error, Result};

use ExtendedReal::{Finite, NegInf, PosInf};
use Orientation::{Decreasing, Increasing};

fn params(list: &[(&str, f64)]) -> Vec<(String, f64)> {
    list.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn require(name: &'static str, v: f64, ok: bool, reason: &str) -> Result<()> {
    if !v.is_finite() || !ok {
        return Err(Error::param(name, alloc::format!("{v}: {reason}")));
    }
    Ok(())
}

/// The four-piece map with holes of size `eps` and `delta`.
///
/// On `[0, 1/4)` it is `(4 + eps) x`, on `[1/4, 1/2)` it is
/// `-(2 + eps) x + (3 + eps) / 2`, on `[1/2, 3/4)` it is
/// `-(2 + delta) x + (3 + delta) / 2` and on `[3/4, 1]` it is
/// `(4 + delta) x - (3 + delta)`. For `eps = delta = 0` it preserves Lebesgue
/// measure and has integer spikes; for positive parameters the spikes at
/// `1/4` and `3/4` overshoot to `1 + eps/4` and `-delta/4`.
pub fn example1(eps: f64, delta: f64) -> Result<ShiftPeriodicMap> {
    require("eps", eps, eps >= 0.0, "must be non-negative")?;
    require("delta", delta, delta >= 0.0, "must be non-negative")?;
    let top = (4.0 + eps) / 4.0;
    let bottom = -delta / 4.0;
    let p1 = AffinePiece::with_ends(0.0, 0.25, 4.0 + eps, 0.0, 0.0, top);
    let p2 = AffinePiece::with_ends(0.25, 0.5, -(2.0 + eps), (3.0 + eps) / 2.0, top, 0.5);
    let p3 = AffinePiece::with_ends(0.5, 0.75, -(2.0 + delta), (3.0 + delta) / 2.0, 0.5, bottom);
    let p4 = AffinePiece::with_ends(0.75, 1.0, 4.0 + delta, -(3.0 + delta), bottom, 1.0);
    let middle = if eps == delta {
        vec![AffinePiece::with_ends(0.25, 0.75, p2.slope, p2.intercept, top, bottom)]
    } else {
        vec![p2, p3]
    };
    let branches = vec![
        MonotoneBranch::piecewise_affine(vec![p1])?,
        MonotoneBranch::piecewise_affine(middle)?,
        MonotoneBranch::piecewise_affine(vec![p4])?,
    ];
    ShiftPeriodicMap::new("example1", params(&[("eps", eps), ("delta", delta)]), branches)
}

/// Constant `C = 4^{-1/kappa} / (2 (1 - 3^{-1/kappa}))` of [`example2`].
pub fn example2_constant(kappa: f64) -> f64 {
    math::pow(4.0, -1.0 / kappa) / (2.0 * (1.0 - math::pow(3.0, -1.0 / kappa)))
}

/// `C (d3^{-1/kappa} - d1^{-1/kappa}) + 1/2` from the distances to `3/4` and `1/4`.
fn example2_value(c: f64, kappa: f64, d1: f64, d3: f64) -> f64 {
    let e = -1.0 / kappa;
    c * (math::pow(d3, e) - math::pow(d1, e)) + 0.5
}

/// The three-branch map `C (|x - 3/4|^{-1/kappa} - |x - 1/4|^{-1/kappa}) + 1/2`.
///
/// The constant makes `F(0) = 0` and `F(1) = 1`. The map tends to `-inf` on
/// both sides of `1/4` and to `+inf` on both sides of `3/4`; its jumps have
/// tails of order `M^{-kappa}`.
pub fn example2(kappa: f64) -> Result<ShiftPeriodicMap> {
    require("kappa", kappa, kappa > 0.0, "must be positive")?;
    let c = example2_constant(kappa);
    let branches = vec![
        MonotoneBranch::from_fn(0.0, 0.25, Decreasing, Finite(0.0), NegInf, move |p: BranchPoint| {
            example2_value(c, kappa, p.from_hi, 0.5 + p.from_hi)
        })?,
        MonotoneBranch::from_fn(0.25, 0.75, Increasing, NegInf, PosInf, move |p: BranchPoint| {
            example2_value(c, kappa, p.from_lo, p.from_hi)
        })?,
        MonotoneBranch::from_fn(0.75, 1.0, Decreasing, PosInf, Finite(1.0), move |p: BranchPoint| {
            example2_value(c, kappa, 0.5 + p.from_lo, p.from_lo)
        })?,
    ];
    ShiftPeriodicMap::new("example2", params(&[("kappa", kappa)]), branches)
}

/// Largest `a` for which the climbing sine map sends `[0, 1]` into `[0, 1]`.
///
/// Solves `x1 + a sin(2 pi x1) = 1` where `x1` is the first critical point.
pub fn climbing_sine_invariance_threshold() -> f64 {
    let peak = |a: f64| {
        let x1 = math::acos(-1.0 / (2.0 * PI * a)) / (2.0 * PI);
        x1 + a * math::sin(2.0 * PI * x1)
    };
    let (mut lo, mut hi) = (0.2, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if peak(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The climbing sine map `x + a sin(2 pi x)`.
///
/// For `2 pi a > 1` the map has two critical points on `(0, 1)` and three
/// monotone branches; otherwise a single increasing branch.
pub fn climbing_sine(a: f64) -> Result<ShiftPeriodicMap> {
    require("a", a, a >= 0.0, "must be non-negative")?;
    let f = move |x: f64| x + a * math::sin(2.0 * PI * x);
    let g = move |p: BranchPoint| f(p.x);
    let branches = if 2.0 * PI * a > 1.0 {
        let x1 = math::acos(-1.0 / (2.0 * PI * a)) / (2.0 * PI);
        let x2 = 1.0 - x1;
        vec![
            MonotoneBranch::from_fn(0.0, x1, Increasing, Finite(0.0), Finite(f(x1)), g)?,
            MonotoneBranch::from_fn(x1, x2, Decreasing, Finite(f(x1)), Finite(f(x2)), g)?,
            MonotoneBranch::from_fn(x2, 1.0, Increasing, Finite(f(x2)), Finite(1.0), g)?,
        ]
    } else {
        vec![MonotoneBranch::from_fn(0.0, 1.0, Increasing, Finite(0.0), Finite(1.0), g)?]
    };
    ShiftPeriodicMap::new("climbing_sine", params(&[("a", a)]), branches)
}

/// The climbing tangent map `x + a tan(2 pi x)`, singular at `1/4` and `3/4`.
///
/// All three branches increase, and the map preserves Lebesgue measure.
pub fn climbing_tangent(a: f64) -> Result<ShiftPeriodicMap> {
    require("a", a, a > 0.0, "must be positive")?;
    let cot = |s: f64| 1.0 / math::tan(2.0 * PI * s);
    let branches = vec![
        MonotoneBranch::from_fn(0.0, 0.25, Increasing, Finite(0.0), PosInf, move |p: BranchPoint| {
            p.x + a * cot(p.from_hi)
        })?,
        MonotoneBranch::from_fn(0.25, 0.75, Increasing, NegInf, PosInf, move |p: BranchPoint| {
            if p.from_lo <= p.from_hi {
                p.x - a * cot(p.from_lo)
            } else {
                p.x + a * cot(p.from_hi)
            }
        })?,
        MonotoneBranch::from_fn(0.75, 1.0, Increasing, NegInf, Finite(1.0), move |p: BranchPoint| {
            p.x - a * cot(p.from_lo)
        })?,
    ];
    ShiftPeriodicMap::new("climbing_tangent", params(&[("a", a)]), branches)
}

/// The Pomeau-Manneville type map with a neutral or weakly expanding fixed point.
///
/// On `(0, 1/2)` it is `(1 + eps) x + a x^b`, extended to `(1/2, 1)` by the
/// odd symmetry `F(x) = 1 - F(1 - x)`.
pub fn pomeau_manneville(a: f64, b: f64, eps: f64) -> Result<ShiftPeriodicMap> {
    require("a", a, a >= 1.0, "must be at least 1")?;
    require("b", b, b >= 1.0, "must be at least 1")?;
    require("eps", eps, eps >= 0.0, "must be non-negative")?;
    let left = move |x: f64| (1.0 + eps) * x + a * math::pow(x, b);
    let mid = left(0.5);
    let branches = vec![
        MonotoneBranch::from_fn(0.0, 0.5, Increasing, Finite(0.0), Finite(mid), move |p: BranchPoint| left(p.x))?,
        MonotoneBranch::from_fn(0.5, 1.0, Increasing, Finite(1.0 - mid), Finite(1.0), move |p: BranchPoint| {
            1.0 - left(p.from_hi)
        })?,
    ];
    ShiftPeriodicMap::new("pomeau_manneville", params(&[("a", a), ("b", b), ("eps", eps)]), branches)
}

/// A map whose limits at `1/4` are not integers.
///
/// It is `2x` on `[0, 1/4)`, `1 - 2x` on `[1/4, 1/2)` and agrees with
/// [`example2`] on `[1/2, 1)`. It serves as the negative case for the
/// integer-spike checks.
pub fn nonint_example(kappa: f64) -> Result<ShiftPeriodicMap> {
    require("kappa", kappa, kappa > 0.0, "must be positive")?;
    let c = example2_constant(kappa);
    let branches = vec![
        MonotoneBranch::affine(0.0, 0.25, 2.0, 0.0)?,
        MonotoneBranch::affine(0.25, 0.5, -2.0, 1.0)?,
        MonotoneBranch::from_fn(0.5, 0.75, Increasing, Finite(example2_value(c, kappa, 0.25, 0.25)), PosInf, move |p| {
            example2_value(c, kappa, 0.25 + p.from_lo, p.from_hi)
        })?,
        MonotoneBranch::from_fn(0.75, 1.0, Decreasing, PosInf, Finite(1.0), move |p| {
            example2_value(c, kappa, 0.5 + p.from_lo, p.from_lo)
        })?,
    ];
    ShiftPeriodicMap::new("nonint_example", params(&[("kappa", kappa)]), branches)
}

/// `h(x) = x (1 + x) / 2`, the coordinate change of [`conjugated_example1`].
pub fn conjugating_h(x: f64) -> f64 {
    0.5 * x * (1.0 + x)
}

/// Inverse of [`conjugating_h`], in a cancellation-free form.
pub fn conjugating_h_inv(y: f64) -> f64 {
    4.0 * y / (1.0 + math::sqrt(1.0 + 8.0 * y))
}

/// Density of `h(U)` for uniform `U`: the invariant density of [`conjugated_example1`].
pub fn conjugated_example1_density(y: f64) -> f64 {
    2.0 / math::sqrt(1.0 + 8.0 * y)
}

/// `F = h o G o h^{-1}` with `G = example1(4, 4)` and `h(x) = x (1 + x) / 2`.
///
/// A nonlinear map with integer spikes whose conjugacy to a linear map is
/// known in closed form.
pub fn conjugated_example1() -> Result<ShiftPeriodicMap> {
    let g = example1(4.0, 4.0)?;
    let eval = move |p: BranchPoint| {
        let u = conjugating_h_inv(p.x);
        let v = g.eval_unit(u).to_f64();
        let (k, r) = math::split_floor(v);
        conjugating_h(r) + k
    };
    let t1 = conjugating_h(0.25);
    let t2 = conjugating_h(0.75);
    let branches = vec![
        MonotoneBranch::from_fn(0.0, t1, Increasing, Finite(0.0), Finite(2.0), eval.clone())?,
        MonotoneBranch::from_fn(t1, t2, Decreasing, Finite(2.0), Finite(-1.0), eval.clone())?,
        MonotoneBranch::from_fn(t2, 1.0, Increasing, Finite(-1.0), Finite(1.0), eval)?,
    ];
    ShiftPeriodicMap::new("conjugated_example1", Vec::new(), branches)
}

/// Builds a builtin map from its family name and named parameters.
///
/// Missing parameters take the defaults `eps = delta = 0`, `kappa = 1`,
/// `a = 1`, `b = 2`.
pub fn by_name(name: &str, params: &[(&str, f64)]) -> Result<ShiftPeriodicMap> {
    let get = |k: &str, d: f64| params.iter().find(|(n, _)| *n == k).map(|(_, v)| *v).unwrap_or(d);
    for (k, _) in params {
        let known: &[&str] = match name {
            "example1" => &["eps", "delta"],
            "example2" | "nonint_example" => &["kappa"],
            "climbing_sine" | "climbing_tangent" => &["a"],
            "pomeau_manneville" => &["a", "b", "eps"],
            _ => &[],
        };
        if !known.contains(k) {
            return Err(Error::param("params", alloc::format!("unknown parameter `{k}` for `{name}`")));
        }
    }
    match name {
        "example1" => example1(get("eps", 0.0), get("delta", 0.0)),
        "example2" => example2(get("kappa", 1.0)),
        "climbing_sine" => climbing_sine(get("a", 1.0)),
        "climbing_tangent" => climbing_tangent(get("a", 1.0)),
        "pomeau_manneville" => pomeau_manneville(get("a", 1.0), get("b", 2.0), get("eps", 0.0)),
        "nonint_example" => nonint_example(get("kappa", 1.0)),
        "conjugated_example1" => conjugated_example1(),
        other => Err(Error::param("family", alloc::format!("unknown map family `{other}`"))),
    }
}

/// Names accepted by [`by_name`].
pub const FAMILIES: &[&str] = &[
    "example1",
    "example2",
    "climbing_sine",
    "climbing_tangent",
    "pomeau_manneville",
    "nonint_example",
    "conjugated_example1",
];
