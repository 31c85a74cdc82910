//! Small numerical toolkit: floating helpers, bracketing root search,
//! adaptive quadrature and a few special functions.

use alloc::vec::Vec;

use crate::{Error, Result};

pub use libm::{acos, atan, ceil, cos, erfc, exp, floor, log, pow, sin, sqrt, tan, tgamma};

/// Archimedes' constant.
pub const PI: f64 = core::f64::consts::PI;

/// Splits `x` into `(floor(x), x - floor(x))` with the fractional part in `[0, 1)`.
///
/// The guard matters for tiny negative inputs, where `x - floor(x)` rounds to `1.0`.
#[inline]
pub fn split_floor(x: f64) -> (f64, f64) {
    let f = floor(x);
    let r = x - f;
    if r >= 1.0 {
        (f + 1.0, 0.0)
    } else {
        (f, r)
    }
}

/// Fractional part in `[0, 1)`.
#[inline]
pub fn fract(x: f64) -> f64 {
    split_floor(x).1
}

/// Distance from `x` to the nearest integer.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    (x - libm::round(x)).abs()
}

/// Finds the boundary of a monotone predicate on `[lo, hi]` with `0 <= lo < hi`.
///
/// `pred(lo)` is taken as false and `pred(hi)` as true. The search halves the
/// range of bit patterns, so it reaches adjacent doubles in at most 64 steps
/// even when the boundary sits at `1e-200`. Returns the smallest double in
/// `(lo, hi]` found to satisfy `pred`.
pub fn bisect_bits(lo: f64, hi: f64, mut pred: impl FnMut(f64) -> bool) -> f64 {
    debug_assert!(lo >= 0.0 && hi > lo);
    let mut a = lo.to_bits();
    let mut b = hi.to_bits();
    while b - a > 1 {
        let m = a + (b - a) / 2;
        if pred(f64::from_bits(m)) {
            b = m;
        } else {
            a = m;
        }
    }
    f64::from_bits(b)
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    /// Adds a term.
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current value.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator.
pub fn sum_compensated(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = KahanSum::default();
    for v in it {
        s.add(v);
    }
    s.value()
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over the finite interval `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the total
/// estimate is below `max(abs_tol, rel_tol * |I|)` or `max_intervals` is reached.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut parts: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    parts.push((a, b, v, e));
    loop {
        let total: f64 = sum_compensated(parts.iter().map(|p| p.2));
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::NonFinite("quadrature"));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if parts.len() >= max_intervals {
            return Err(Error::NoConvergence { iterations: parts.len(), residual: err });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / core::f64::consts::SQRT_2)
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma function `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cont_frac(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * exp(-x + a * log(x) - libm::lgamma(a))
}

fn gamma_cont_frac(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    exp(-x + a * log(x) - libm::lgamma(a)) * h
}

/// Survival function of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    gamma_q(0.5 * df, 0.5 * x)
}

/// Quantile of the chi-square distribution: the `x` with `P(X <= x) = p`.
pub fn chi_square_quantile(p: f64, df: f64) -> f64 {
    let target = 1.0 - p;
    let mut hi = df.max(1.0);
    while chi_square_sf(hi, df) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_square_sf(mid, df) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi theta form converges fast for small arguments.
        let mut s = 0.0;
        let c = PI * PI / (8.0 * lambda * lambda);
        for k in 1..50 {
            let j = (2 * k - 1) as f64;
            s += exp(-j * j * c);
        }
        1.0 - sqrt(2.0 * PI) / lambda * s
    } else {
        let mut s = 0.0;
        for k in 1..100 {
            let kf = k as f64;
            let term = exp(-2.0 * kf * kf * lambda * lambda);
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}
