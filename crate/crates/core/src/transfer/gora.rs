use alloc::vec::Vec;

use super::density::PiecewiseConstantDensity;
use crate::maps::builtin::example1;
use crate::maps::AffinePiece;
use crate::math::floor;
use crate::{Error, Result};

/// Side from which an orbit point is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    /// Limit from the left.
    Below,
    /// Limit from the right.
    Above,
}

impl Side {
    fn flip(self) -> Side {
        match self {
            Side::Below => Side::Above,
            Side::Above => Side::Below,
        }
    }
}

/// A point of a one-sided orbit with the derivative of the iterate along it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrbitPoint {
    /// Position in `[0, 1]`.
    pub y: f64,
    /// Side from which nearby points approach `y`.
    pub side: Side,
    /// Product of the slopes met so far.
    pub beta: f64,
}

/// Iterates `F_r` on one-sided limits of a piecewise affine map.
///
/// Landing exactly on a piece end is harmless: the side selects the piece.
/// Returns the orbit `y_1..y_n` and the number of such landings.
fn one_sided_orbit(pieces: &[AffinePiece], c: f64, side: Side, n: usize) -> (Vec<OrbitPoint>, usize) {
    let mut p = OrbitPoint { y: c, side, beta: 1.0 };
    let mut out = Vec::with_capacity(n);
    let mut hits = 0;
    for step in 0..n {
        let piece = match p.side {
            Side::Below => pieces.iter().find(|q| q.lo < p.y && p.y <= q.hi),
            Side::Above => pieces.iter().find(|q| q.lo <= p.y && p.y < q.hi),
        }
        .expect("pieces tile [0, 1]");
        if step > 0 && pieces.iter().any(|q| q.lo == p.y && q.lo > 0.0) {
            hits += 1;
        }
        let v = piece.eval(p.y);
        let side = if piece.slope > 0.0 { p.side } else { p.side.flip() };
        let k = floor(v);
        let y = match (v == k, side) {
            (true, Side::Below) => 1.0,
            (true, Side::Above) => 0.0,
            _ => v - k,
        };
        p = OrbitPoint { y, side, beta: p.beta * piece.slope };
        out.push(p);
    }
    (out, hits)
}

/// One indicator window of the closed-form density.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoraTerm {
    /// Window end `A = F_r^n(c)`.
    pub point: f64,
    /// Whether the window is `[0, A]`; otherwise it is `[A, 1]`.
    pub lower: bool,
    /// `D / |beta|`.
    pub weight: f64,
}

/// Truncated closed-form invariant density of the four-piece map.
///
/// `f(x) = (1 + sum of weights of the windows containing x) / K`, one window
/// per critical point, side and iterate.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoraDensity {
    /// All windows.
    pub terms: Vec<GoraTerm>,
    /// Normalization constant.
    pub k: f64,
    /// Orbits of `(1/4, right)`, `(3/4, right)`, `(1/4, left)`, `(3/4, left)`.
    pub orbits: [Vec<OrbitPoint>; 4],
    /// Orbit points that fell exactly on a piece end.
    pub breakpoint_hits: usize,
}

impl GoraDensity {
    /// Density at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let s: f64 = self.terms.iter().filter(|t| if t.lower { x <= t.point } else { x >= t.point }).map(|t| t.weight).sum();
        (1.0 + s) / self.k
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut s = b - a;
        for t in &self.terms {
            let (lo, hi) = if t.lower { (0.0, t.point) } else { (t.point, 1.0) };
            s += t.weight * (hi.min(b) - lo.max(a)).max(0.0);
        }
        s / self.k
    }

    /// The density as a piecewise constant function with breaks at the window ends.
    pub fn to_piecewise(&self) -> PiecewiseConstantDensity {
        let mut breaks: Vec<f64> = self.terms.iter().map(|t| t.point).filter(|y| *y > 0.0 && *y < 1.0).collect();
        breaks.extend([0.0, 1.0]);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let values = breaks.windows(2).map(|w| self.integral(w[0], w[1]) / (w[1] - w[0])).collect();
        PiecewiseConstantDensity::new(breaks, values).expect("window sums are valid densities")
    }
}

/// One-sided orbit of length `n` through `c` for the four-piece map.
pub fn example1_orbit(eps: f64, delta: f64, c: f64, side: Side, n: usize) -> Result<Vec<OrbitPoint>> {
    Ok(one_sided_orbit(&pieces(eps, delta)?, c, side, n).0)
}

fn pieces(eps: f64, delta: f64) -> Result<Vec<AffinePiece>> {
    let m = example1(eps, delta)?;
    Ok(m.branches().iter().flat_map(|b| b.pieces().expect("affine").iter().copied()).collect())
}

/// Truncated closed-form invariant density of the four-piece map.
///
/// `d` holds `(D^L_1, D^L_2, D^R_1, D^R_2)` for the critical points `1/4` and
/// `3/4`. `beta^L` is the derivative of `F_r^n` approached from the right of the
/// critical point and `beta^R` from the left; the window for `beta^L` is
/// oriented by `-beta^L` and the window for `beta^R` by `beta^R`. `K` is
/// computed by exact integration.
pub fn gora_density(eps: f64, delta: f64, d: [f64; 4], n_terms: usize) -> Result<GoraDensity> {
    if n_terms == 0 {
        return Err(Error::param("n_terms", "must be at least 1"));
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("D"));
    }
    let pieces = pieces(eps, delta)?;
    let starts = [(0.25, Side::Above), (0.75, Side::Above), (0.25, Side::Below), (0.75, Side::Below)];
    let mut terms = Vec::with_capacity(4 * n_terms);
    let mut hits = 0;
    let orbits = starts.map(|(c, side)| {
        let (o, h) = one_sided_orbit(&pieces, c, side, n_terms);
        hits += h;
        o
    });
    for (idx, orbit) in orbits.iter().enumerate() {
        let from_right = idx < 2;
        for p in orbit {
            let orient = if from_right { -p.beta } else { p.beta };
            terms.push(GoraTerm { point: p.y, lower: orient > 0.0, weight: d[idx] / p.beta.abs() });
        }
    }
    let mass: f64 = 1.0 + terms.iter().map(|t| t.weight * if t.lower { t.point } else { 1.0 - t.point }).sum::<f64>();
    if !(mass > 0.0) {
        return Err(Error::DensityShape("non-positive normalization".into()));
    }
    Ok(GoraDensity { terms, k: mass, orbits, breakpoint_hits: hits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::{orbit_refined_breaks, ulam_on_partition};

    #[test]
    fn integrates_to_one() {
        for (e, dl) in [(0.01, 0.01), (0.1, 0.03), (1e-7, 1e-7)] {
            let g = gora_density(e, dl, [1.0, 0.9, 1.1, 1.0], 30).unwrap();
            assert!((g.integral(0.0, 1.0) - 1.0).abs() < 1e-14);
            assert!((g.to_piecewise().mass() - 1.0).abs() < 1e-12);
        }
        assert!(gora_density(0.01, 0.01, [1.0; 4], 0).is_err());
    }

    #[test]
    fn derivative_grows_at_least_like_two_to_the_n() {
        for (e, dl) in [(0.0, 0.0), (0.01, 0.02), (0.5, 0.1)] {
            let g = gora_density(e, dl, [1.0; 4], 40).unwrap();
            for orbit in &g.orbits {
                for (n, p) in orbit.iter().enumerate() {
                    assert!(p.beta.abs() >= 2f64.powi(n as i32 + 1));
                }
            }
        }
    }

    #[test]
    fn one_sided_first_images() {
        let eps = 0.01;
        let right = example1_orbit(eps, eps, 0.25, Side::Above, 1).unwrap()[0];
        let left = example1_orbit(eps, eps, 0.25, Side::Below, 1).unwrap()[0];
        assert!((right.y - eps / 4.0).abs() < 1e-15 && (left.y - eps / 4.0).abs() < 1e-15);
        assert_eq!((right.side, left.side), (Side::Below, Side::Below));
        assert_eq!((right.beta, left.beta), (-(2.0 + eps), 4.0 + eps));
    }

    #[test]
    fn small_spikes_give_the_layer_law() {
        // 1 + 1/4^n between consecutive orbit points of 1/4, up to O(eps) corrections
        let eps = 1e-7;
        let g = gora_density(eps, eps, [1.0; 4], 30).unwrap();
        let o = &g.orbits[2];
        assert!((g.eval(0.5 * o[0].y) - 2.0).abs() < 1e-5);
        for n in 1..6 {
            let x = 0.5 * (o[n - 1].y + o[n].y);
            assert!((g.eval(x) - (1.0 + 0.25f64.powi(n as i32))).abs() < 1e-5);
        }
    }

    #[test]
    fn hitting_a_piece_end_uses_the_side() {
        // with eps = 4 the spike at 1/4 reaches 2, so 1/4 maps to an integer
        let g = gora_density(4.0, 0.0, [1.0; 4], 5).unwrap();
        assert!((g.integral(0.0, 1.0) - 1.0).abs() < 1e-14);
        assert!(g.orbits[0][0].y == 0.0 || g.orbits[0][0].y == 1.0);
    }

    #[test]
    fn agrees_with_ulam_in_the_bulk() {
        let eps = 1e-7;
        let m = example1(eps, eps).unwrap();
        let u = ulam_on_partition(&m, orbit_refined_breaks(&m, 4000, 20)).unwrap().density();
        let g = gora_density(eps, eps, [1.0; 4], 20).unwrap();
        let mut worst = 0.0f64;
        for k in 160..3840 {
            let (a, b) = (k as f64 / 4000.0, (k + 1) as f64 / 4000.0);
            worst = worst.max((u.average(a, b) - g.integral(a, b) / (b - a)).abs());
        }
        assert!(worst < 0.005, "{worst}");
    }
}
