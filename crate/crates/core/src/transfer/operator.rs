use alloc::vec::Vec;

use super::density::PiecewiseConstantDensity;
use crate::maps::builtin::example1;
use crate::maps::{AffinePiece, ShiftPeriodicMap};
use crate::math::{sqrt, KahanSum};
use crate::{Error, Result};

/// Breakpoints closer than this are identified.
const BREAK_TOL: f64 = 1e-14;
/// Neighbouring cells whose values differ by at most this are merged.
const MERGE_TOL: f64 = 1e-14;

/// `l(x) = x (3 + x) / (2 (x + 2) (x + 4))`, the Lebesgue measure of the points
/// of `[0, 1]` that one spike of height `x / 4` sends outside `[0, 1]`.
pub fn hole_measure(x: f64) -> f64 {
    x * (3.0 + x) / (2.0 * (x + 2.0) * (x + 4.0))
}

/// Frobenius-Perron operator of a piecewise affine map with holes.
///
/// The map is not reduced modulo one: mass sent outside `[0, 1]` is lost and the
/// survivors are renormalized. Piecewise constant densities are mapped exactly.
#[derive(Debug, Clone)]
pub struct LinearTransferOperator {
    pieces: Vec<AffinePiece>,
}

impl LinearTransferOperator {
    /// Operator of a piecewise affine map.
    pub fn new(map: &ShiftPeriodicMap) -> Result<Self> {
        let mut pieces = Vec::new();
        for b in map.branches() {
            let p = b.pieces().ok_or_else(|| Error::param("map", "branches must be piecewise affine"))?;
            pieces.extend_from_slice(p);
        }
        Ok(LinearTransferOperator { pieces })
    }

    /// Operator of the four-piece map with spike heights `eps / 4` and `delta / 4`.
    pub fn example1(eps: f64, delta: f64) -> Result<Self> {
        Self::new(&example1(eps, delta)?)
    }

    /// One conditioned step: returns `P k` and the surviving mass `C`.
    pub fn step(&self, k: &PiecewiseConstantDensity) -> Result<(PiecewiseConstantDensity, f64)> {
        let mut cand: Vec<f64> = alloc::vec![0.0, 1.0];
        for p in &self.pieces {
            let mut push = |y: f64| {
                if y > 0.0 && y < 1.0 {
                    cand.push(y);
                }
            };
            push(p.y_lo);
            push(p.y_hi);
            for &x in k.breaks() {
                if x > p.lo && x < p.hi {
                    push(p.eval(x));
                }
            }
        }
        cand.sort_by(f64::total_cmp);
        let mut breaks: Vec<f64> = Vec::with_capacity(cand.len());
        for y in cand {
            match breaks.last() {
                Some(&last) if y - last <= BREAK_TOL => {
                    if y == 1.0 {
                        *breaks.last_mut().unwrap() = 1.0;
                    }
                }
                _ => breaks.push(y),
            }
        }
        if breaks.len() > 2 && breaks[0] == 0.0 && breaks[1] <= BREAK_TOL {
            breaks.remove(1);
        }
        let mut values = Vec::with_capacity(breaks.len() - 1);
        let mut mass = KahanSum::default();
        for w in breaks.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let mut v = KahanSum::default();
            for p in &self.pieces {
                let (ylo, yhi) = if p.y_lo < p.y_hi { (p.y_lo, p.y_hi) } else { (p.y_hi, p.y_lo) };
                if t > ylo && t < yhi {
                    let x = p.lo + (t - p.y_lo) / p.slope;
                    v.add(k.eval(x.clamp(p.lo, p.hi)) / p.slope.abs());
                }
            }
            let v = v.value();
            mass.add(v * (w[1] - w[0]));
            values.push(v);
        }
        let c = mass.value();
        if !(c > 0.0) {
            return Err(Error::TotalEscape);
        }
        values.iter_mut().for_each(|v| *v /= c);
        Ok((PiecewiseConstantDensity::from_parts_unchecked(breaks, values).merged(MERGE_TOL), c))
    }
}

/// One Frobenius-Perron step of the four-piece map with holes.
///
/// Returns the renormalized image of `k` and the mass `C` that stays in `[0, 1]`.
pub fn fp_step(eps: f64, delta: f64, k: &PiecewiseConstantDensity) -> Result<(PiecewiseConstantDensity, f64)> {
    LinearTransferOperator::example1(eps, delta)?.step(k)
}

/// The conditionally invariant density: `nu` on `(0, 1/2)` and `2 - nu` on `(1/2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CondInvariantDensity {
    /// Value on the left half, in `[0, 2]`.
    pub nu: f64,
    /// Height parameter of the upper spike.
    pub epsilon: f64,
    /// Height parameter of the lower spike.
    pub delta: f64,
}

impl CondInvariantDensity {
    /// The density as a piecewise constant function.
    pub fn density(&self) -> PiecewiseConstantDensity {
        PiecewiseConstantDensity::two_piece(self.nu).expect("nu lies in [0, 2]")
    }

    /// Sup distance between the density and its image under one step, and the surviving mass.
    pub fn fixed_point_residual(&self) -> Result<(f64, f64)> {
        let d = self.density();
        let (next, c) = fp_step(self.epsilon, self.delta, &d)?;
        Ok((next.sup_distance(&d), c))
    }
}

/// Solves the fixed-point equation for `nu` and checks it with one operator step.
///
/// With `p = 1/(4+eps)`, `q = 1/(2+eps)`, `r = 1/(2+delta)`, `s = 1/(4+delta)`
/// the equation is `a2 nu^2 + a1 nu + a0 = 0` where `a2 = (2p + q - r - 2s)/2`,
/// `a1 = 2r + 3s - p` and `a0 = -2 (r + s)`.
pub fn cond_invariant_density(eps: f64, delta: f64) -> Result<CondInvariantDensity> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", alloc::format!("{eps} must be non-negative")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", alloc::format!("{delta} must be non-negative")));
    }
    let (p, q, r, s) = (1.0 / (4.0 + eps), 1.0 / (2.0 + eps), 1.0 / (2.0 + delta), 1.0 / (4.0 + delta));
    let a2 = (2.0 * p + q - r - 2.0 * s) / 2.0;
    let a1 = 2.0 * r + 3.0 * s - p;
    let a0 = -2.0 * (r + s);
    let roots: Vec<f64> = if a2 == 0.0 {
        alloc::vec![-a0 / a1]
    } else {
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc < 0.0 {
            return Err(Error::RootSearch("negative discriminant".into()));
        }
        let h = -0.5 * (a1 + a1.signum() * sqrt(disc));
        alloc::vec![a0 / h, h / a2]
    };
    let nu = roots
        .into_iter()
        .find(|x| (-1e-12..=2.0 + 1e-12).contains(x))
        .ok_or_else(|| Error::RootSearch("no root in [0, 2]".into()))?
        .clamp(0.0, 2.0);
    let c = CondInvariantDensity { nu, epsilon: eps, delta };
    let (res, _) = c.fixed_point_residual()?;
    if res > 1e-10 {
        return Err(Error::RootSearch(alloc::format!("fixed-point residual {res}")));
    }
    Ok(c)
}

/// Gap between the two values on the half that contains the extra breakpoint.
///
/// Accepts densities with breakpoints `{0, b, 1/2, 1}` or `{0, 1/2, b, 1}`, and
/// returns zero for densities constant on each half.
pub fn psi(k: &PiecewiseConstantDensity) -> Result<f64> {
    let (b, v) = (k.breaks(), k.values());
    match b.len() {
        2 => Ok(0.0),
        3 if b[1] == 0.5 => Ok(0.0),
        4 if b[2] == 0.5 => Ok((v[0] - v[1]).abs()),
        4 if b[1] == 0.5 => Ok((v[1] - v[2]).abs()),
        _ => Err(Error::DensityShape(alloc::format!("breakpoints {b:?} are not of the three-piece form"))),
    }
}

/// Sup distances between `P^n k` and the conditionally invariant density for `n = 1..=n_max`,
/// starting from `k` equal to `x` on `(0, 1/2)` and `2 - x` on `(1/2, 1)`.
pub fn convergence_check(eps: f64, delta: f64, x: f64, n_max: usize) -> Result<Vec<f64>> {
    let op = LinearTransferOperator::example1(eps, delta)?;
    let fc = cond_invariant_density(eps, delta)?.density();
    let mut k = PiecewiseConstantDensity::two_piece(x)?;
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        k = op.step(&k)?.0;
        out.push(k.sup_distance(&fc));
    }
    Ok(out)
}
