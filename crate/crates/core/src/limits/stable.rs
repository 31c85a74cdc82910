use rand::{Rng, RngCore};

use crate::math::{self, atan, cos, exp, integrate, log, pow, sin, sqrt, tan, PI};
use crate::{Error, Result};

/// Parameters of the strictly stable law with characteristic function
/// `exp(-|t|^alpha (1 - i beta sgn(t) tan(pi alpha / 2)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StableParams {
    alpha: f64,
    beta: f64,
}

impl StableParams {
    /// Checks `alpha` in `(0, 2]`, `beta` in `[-1, 1]` and `beta = 0` when `alpha = 1`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::param("alpha", alloc::format!("{alpha} is outside (0, 2]")));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::param("beta", alloc::format!("{beta} is outside [-1, 1]")));
        }
        if alpha == 1.0 && beta != 0.0 {
            return Err(Error::param("beta", "must be 0 when alpha = 1"));
        }
        Ok(StableParams { alpha, beta })
    }

    /// Stability index.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Skewness.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn skew_term(&self) -> f64 {
        if self.alpha == 1.0 {
            0.0
        } else {
            self.beta * tan(PI * self.alpha / 2.0)
        }
    }

    /// Characteristic function at `t` as `(re, im)`.
    pub fn char_fn(&self, t: f64) -> (f64, f64) {
        let a = pow(t.abs(), self.alpha);
        let phase = self.skew_term() * t.signum() * a;
        let m = exp(-a);
        (m * cos(phase), m * sin(phase))
    }
}

/// Draws from `S(alpha, beta)` by the Chambers-Mallows-Stuck construction.
///
/// The target characteristic function is the unit-scale, zero-shift member
/// of the usual `S_1` family, so the construction applies with skew angle
/// `B = atan(beta tan(pi alpha / 2)) / alpha` and scale
/// `S = (1 + beta^2 tan^2(pi alpha / 2))^{1 / (2 alpha)}`. At `alpha = 1` only
/// `beta = 0` is admitted and the draw is `tan(V)`, a standard Cauchy variate.
pub fn stable_sample(p: &StableParams, rng: &mut dyn RngCore) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    if p.alpha == 1.0 {
        return tan(v);
    }
    let w = -log(1.0 - rng.random::<f64>());
    let a = p.alpha;
    let bt = p.skew_term();
    let b = atan(bt) / a;
    let s = pow(1.0 + bt * bt, 1.0 / (2.0 * a));
    s * sin(a * (v + b)) / pow(cos(v), 1.0 / a) * pow(cos(v - a * (v + b)) / w, (1.0 - a) / a)
}

/// Distribution function of `S(alpha, beta)` at `x` by the Gil-Pelaez inversion
/// `F(x) = 1/2 - (1/pi) int_0^inf Im(exp(-itx) phi(t)) / t dt`.
///
/// For `alpha < 1` the integral is taken in `u = t^alpha`, which removes the
/// singularity at the origin. The absolute error target is `1e-9`.
pub fn stable_cdf(p: &StableParams, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Ok(if x > 0.0 { 1.0 } else { 0.0 });
    }
    let a = p.alpha;
    let bk = p.skew_term();
    // exp(-40) is far below the target
    let cut = 40.0;
    let integral = if a >= 1.0 {
        let f = |t: f64| exp(-pow(t, a)) * sin(bk * pow(t, a) - x * t) / t;
        integrate(f, 0.0, pow(cut, 1.0 / a), 1e-11, 0.0, 20_000)?
    } else {
        let f = |u: f64| exp(-u) * sin(bk * u - x * pow(u, 1.0 / a)) / u;
        integrate(f, 0.0, cut, 1e-11, 0.0, 20_000)? / a
    };
    Ok((0.5 - integral / PI).clamp(0.0, 1.0))
}

/// Distribution function of `N(0, 2)`, the law `S(2, beta)` in closed form.
pub fn gaussian_limit_cdf(x: f64) -> f64 {
    math::normal_cdf(x / sqrt(2.0))
}

/// Standard Cauchy distribution function, the law `S(1, 0)` in closed form.
pub fn cauchy_cdf(x: f64) -> f64 {
    0.5 + atan(x) / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_rng;
    use crate::stats::{ks_one_sample, ks_two_sample};
    use alloc::vec::Vec;

    #[test]
    fn parameter_checks() {
        assert!(StableParams::new(1.0, 0.5).is_err());
        assert!(StableParams::new(0.0, 0.0).is_err());
        assert!(StableParams::new(2.1, 0.0).is_err());
        assert!(StableParams::new(1.5, -1.2).is_err());
        assert!(StableParams::new(2.0, 1.0).is_ok());
    }

    #[test]
    fn cdf_oracles() {
        let c = StableParams::new(1.0, 0.0).unwrap();
        assert!((stable_cdf(&c, 1.0).unwrap() - 0.75).abs() < 1e-6);
        let g = StableParams::new(2.0, 0.0).unwrap();
        assert!((stable_cdf(&g, 0.0).unwrap() - 0.5).abs() < 1e-12);
        for k in -10..=10 {
            let x = 0.5 * k as f64;
            assert!((stable_cdf(&g, x).unwrap() - gaussian_limit_cdf(x)).abs() < 1e-6, "{x}");
            assert!((stable_cdf(&c, x).unwrap() - cauchy_cdf(x)).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn cdf_is_monotone_for_skewed_laws() {
        for (a, b) in [(0.7, 1.0), (1.5, -0.5), (0.5, 0.3)] {
            let p = StableParams::new(a, b).unwrap();
            let v: Vec<f64> = (-20..=20).map(|k| stable_cdf(&p, 0.25 * k as f64).unwrap()).collect();
            assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{a} {b}");
        }
        // totally skewed to the right with alpha < 1: no mass below zero
        let p = StableParams::new(0.7, 1.0).unwrap();
        assert!(stable_cdf(&p, -0.5).unwrap() < 1e-8);
    }

    #[test]
    fn draws_match_the_characteristic_function() {
        let n = 200_000;
        for (a, b) in [(2.0, 0.0), (1.0, 0.0), (0.7, 1.0), (1.5, -0.5)] {
            let p = StableParams::new(a, b).unwrap();
            let mut rng = path_rng(11, 0);
            let xs: Vec<f64> = (0..n).map(|_| stable_sample(&p, &mut rng)).collect();
            for t in [0.5, 1.0, 2.0] {
                let (re, im) = p.char_fn(t);
                let (mut sc, mut ss, mut sc2, mut ss2) = (0.0, 0.0, 0.0, 0.0);
                for x in &xs {
                    let (c, s) = (cos(t * x), sin(t * x));
                    sc += c;
                    ss += s;
                    sc2 += c * c;
                    ss2 += s * s;
                }
                let nf = n as f64;
                let (mc, ms) = (sc / nf, ss / nf);
                let (ec, es) = (sqrt((sc2 / nf - mc * mc) / nf), sqrt((ss2 / nf - ms * ms) / nf));
                assert!((mc - re).abs() < 4.0 * ec + 1e-12, "{a} {b} {t}: re {mc} vs {re}");
                assert!((ms - im).abs() < 4.0 * es + 1e-12, "{a} {b} {t}: im {ms} vs {im}");
            }
        }
    }

    #[test]
    fn draws_match_the_distribution_function() {
        let p = StableParams::new(1.5, -0.5).unwrap();
        let mut rng = path_rng(5, 0);
        let xs: Vec<f64> = (0..4000).map(|_| stable_sample(&p, &mut rng)).collect();
        let r = ks_one_sample(&xs, |x| stable_cdf(&p, x).unwrap()).unwrap();
        assert!(r.passes_1(), "{r:?}");
    }

    #[test]
    fn normalized_sums_are_self_similar() {
        let k = 8;
        for (a, b) in [(2.0, 0.0), (1.0, 0.0), (0.7, 1.0), (1.5, -0.5)] {
            let p = StableParams::new(a, b).unwrap();
            let mut rng = path_rng(3, 1);
            let scale = pow(k as f64, 1.0 / a);
            let sums: Vec<f64> = (0..20_000).map(|_| (0..k).map(|_| stable_sample(&p, &mut rng)).sum::<f64>() / scale).collect();
            let direct: Vec<f64> = (0..20_000).map(|_| stable_sample(&p, &mut rng)).collect();
            let r = ks_two_sample(&sums, &direct).unwrap();
            assert!(r.passes_1(), "{a} {b}: {r:?}");
        }
    }
}
