use alloc::vec::Vec;

use rand::RngCore;

use crate::math::{sum_compensated, KahanSum};
use crate::rng::UnitSampler;
use crate::{Error, Result};

/// A probability density on `[0, 1]` that is constant between breakpoints.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PiecewiseConstantDensity {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantDensity {
    /// Builds a density; `breaks` runs from 0 to 1 and has one more entry than `values`.
    ///
    /// The values are rescaled so the total mass is exactly one.
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let mut d = Self::checked(breaks, values)?;
        let mass = d.mass();
        if !(mass > 0.0) {
            return Err(Error::DensityShape("zero mass".into()));
        }
        d.values.iter_mut().for_each(|v| *v /= mass);
        Ok(d)
    }

    /// Builds a density whose mass is already one within `tol`, keeping the values bit for bit.
    pub fn from_normalized(breaks: Vec<f64>, values: Vec<f64>, tol: f64) -> Result<Self> {
        let d = Self::checked(breaks, values)?;
        let mass = d.mass();
        if !((mass - 1.0).abs() <= tol) {
            return Err(Error::DensityShape(alloc::format!("mass {mass} differs from 1 by more than {tol:e}")));
        }
        Ok(d)
    }

    fn checked(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::DensityShape("need one more breakpoint than values".into()));
        }
        if breaks[0] != 0.0 || breaks[breaks.len() - 1] != 1.0 {
            return Err(Error::DensityShape("breakpoints must start at 0 and end at 1".into()));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::DensityShape("breakpoints must increase strictly".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::DensityShape("values must be finite and non-negative".into()));
        }
        Ok(PiecewiseConstantDensity { breaks, values })
    }

    /// Lebesgue density.
    pub fn uniform() -> Self {
        PiecewiseConstantDensity { breaks: alloc::vec![0.0, 1.0], values: alloc::vec![1.0] }
    }

    /// Value `x` on `(0, 1/2)` and `2 - x` on `(1/2, 1)`, for `x` in `[0, 2]`.
    pub fn two_piece(x: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&x) {
            return Err(Error::param("x", alloc::format!("{x} is outside [0, 2]")));
        }
        Ok(PiecewiseConstantDensity { breaks: alloc::vec![0.0, 0.5, 1.0], values: alloc::vec![x, 2.0 - x] })
    }

    /// Breakpoints.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Cell values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.values.len()
    }

    /// Integral over `[0, 1]`.
    pub fn mass(&self) -> f64 {
        sum_compensated(self.values.iter().zip(self.breaks.windows(2)).map(|(v, w)| v * (w[1] - w[0])))
    }

    /// Index of the cell containing `t`; breakpoints belong to the cell on their right.
    pub fn cell_of(&self, t: f64) -> usize {
        self.breaks.partition_point(|b| *b <= t).saturating_sub(1).min(self.values.len() - 1)
    }

    /// Value at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.values[self.cell_of(t)]
    }

    /// Integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut s = KahanSum::default();
        let (a, b) = (a.max(0.0), b.min(1.0));
        if !(a < b) {
            return 0.0;
        }
        for k in self.cell_of(a)..self.values.len() {
            let (lo, hi) = (self.breaks[k].max(a), self.breaks[k + 1].min(b));
            if lo >= b {
                break;
            }
            if hi > lo {
                s.add(self.values[k] * (hi - lo));
            }
        }
        s.value()
    }

    /// Mean value over `[a, b]`.
    pub fn average(&self, a: f64, b: f64) -> f64 {
        self.integral(a, b) / (b - a)
    }

    /// Sup-norm distance, exact over the common refinement of the breakpoints.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < self.values.len() && j < other.values.len() {
            d = d.max((self.values[i] - other.values[j]).abs());
            let (ei, ej) = (self.breaks[i + 1], other.breaks[j + 1]);
            if ei <= ej {
                i += 1;
            }
            if ej <= ei {
                j += 1;
            }
        }
        d
    }

    /// Sup-norm distance to a function, restricted to cells meeting `[a, b]`, at cell midpoints of the overlap.
    pub fn sup_distance_to(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let mut d = 0.0f64;
        for k in 0..self.values.len() {
            let (lo, hi) = (self.breaks[k].max(a), self.breaks[k + 1].min(b));
            if hi > lo {
                d = d.max((self.values[k] - f(0.5 * (lo + hi))).abs());
            }
        }
        d
    }

    /// Merges neighbouring cells whose values differ by at most `tol`.
    pub fn merged(&self, tol: f64) -> Self {
        let mut breaks = alloc::vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            match values.last() {
                Some(&last) if (last - v).abs() <= tol => {
                    *breaks.last_mut().unwrap() = self.breaks[k + 1];
                }
                _ => {
                    values.push(v);
                    breaks.push(self.breaks[k + 1]);
                }
            }
        }
        PiecewiseConstantDensity { breaks, values }
    }

    pub(crate) fn from_parts_unchecked(breaks: Vec<f64>, values: Vec<f64>) -> Self {
        PiecewiseConstantDensity { breaks, values }
    }

    /// Point with cumulative mass `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.values.len() {
            let w = self.breaks[k + 1] - self.breaks[k];
            let m = self.values[k] * w;
            if acc + m >= p && m > 0.0 {
                return (self.breaks[k] + (p - acc) / self.values[k]).clamp(self.breaks[k], self.breaks[k + 1]);
            }
            acc += m;
        }
        1.0
    }
}

impl UnitSampler for PiecewiseConstantDensity {
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.quantile(rand::Rng::random::<f64>(rng))
    }
}
