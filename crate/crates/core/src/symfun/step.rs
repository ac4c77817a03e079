use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One constant piece of a [`StepFunction`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub width: f64,
    pub value: f64,
}

/// A nonincreasing, right-continuous step function on `(0, ∞)`.
///
/// Steps are stored left to right with strictly decreasing positive values.
/// The function vanishes beyond the total width; zero-valued steps are never
/// stored, so the support is always finite.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    steps: Vec<Step>,
}

impl StepFunction {
    pub fn zero() -> Self {
        Self { steps: Vec::new() }
    }

    /// Builds a step function from `(width, value)` pairs given left to right.
    ///
    /// Values must be nonincreasing; equal neighbours are merged and trailing
    /// zero steps dropped.
    pub fn new(steps: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut out: Vec<Step> = Vec::new();
        let mut prev = f64::INFINITY;
        for (width, value) in steps {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InvalidStepFunction(format!("width {width} must be positive and finite")));
            }
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidStepFunction(format!("value {value} must be nonnegative and finite")));
            }
            if value > prev {
                return Err(Error::InvalidStepFunction(format!("value {value} follows smaller value {prev}")));
            }
            prev = value;
            if value == 0.0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.value == value => last.width += width,
                _ => out.push(Step { width, value }),
            }
        }
        Ok(Self { steps: out })
    }

    /// Decreasing rearrangement of a finite weighted multiset of `(value, width)`
    /// pairs: every value occupies `width` units of measure.
    ///
    /// Negative values are rejected; zero values and zero widths are ignored.
    pub fn rearrange(items: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut items: Vec<(f64, f64)> = items
            .into_iter()
            .filter(|&(v, w)| v != 0.0 && w != 0.0)
            .collect();
        for &(v, w) in &items {
            if !(v.is_finite() && v > 0.0 && w.is_finite() && w > 0.0) {
                return Err(Error::InvalidStepFunction(format!("cannot rearrange value {v} with width {w}")));
            }
        }
        items.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self::new(items.into_iter().map(|(v, w)| (w, v)))
    }

    /// Indicator of `(0, t)`.
    pub fn indicator(t: f64) -> Result<Self> {
        if t == 0.0 {
            return Ok(Self::zero());
        }
        Self::new([(t, 1.0)])
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_zero(&self) -> bool {
        self.steps.is_empty()
    }

    /// Measure of the support.
    pub fn support(&self) -> f64 {
        self.steps.iter().map(|s| s.width).sum()
    }

    /// Essential supremum, i.e. the first step value.
    pub fn sup(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.value)
    }

    /// Right endpoints `T_1 < T_2 < ...` of the steps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.steps
            .iter()
            .map(|s| {
                acc += s.width;
                acc
            })
            .collect()
    }

    /// Value at `t` (right-continuous: the value on `[T_{i-1}, T_i)`).
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for s in &self.steps {
            acc += s.width;
            if t < acc {
                return s.value;
            }
        }
        0.0
    }

    /// `∫_0^t f`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut total = 0.0;
        for s in &self.steps {
            if t <= acc {
                break;
            }
            let w = s.width.min(t - acc);
            total += w * s.value;
            acc += s.width;
        }
        total
    }

    /// `∫_0^∞ f`.
    pub fn integral(&self) -> f64 {
        self.steps.iter().map(|s| s.width * s.value).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        assert!(c >= 0.0 && c.is_finite(), "scale factor must be nonnegative");
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            steps: self.steps.iter().map(|s| Step { width: s.width, value: s.value * c }).collect(),
        }
    }

    /// `t ↦ f(t / s)`, stretching every width by `s`.
    pub fn dilate(&self, s: f64) -> Self {
        assert!(s > 0.0 && s.is_finite(), "dilation factor must be positive");
        Self {
            steps: self.steps.iter().map(|st| Step { width: st.width * s, value: st.value }).collect(),
        }
    }

    /// Pointwise combination on the common refinement of both partitions.
    fn combine(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        let mut cuts: Vec<f64> = self.breakpoints();
        cuts.extend(other.breakpoints());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut steps = Vec::with_capacity(cuts.len());
        let mut left = 0.0;
        for &c in &cuts {
            let mid = 0.5 * (left + c);
            steps.push((c - left, op(self.eval(mid), other.eval(mid))));
            left = c;
        }
        Self::new(steps.into_iter().filter(|&(w, _)| w > 0.0))
            .expect("pointwise combination of nonincreasing functions is nonincreasing")
    }

    /// Pointwise sum; the sum of two nonincreasing functions is nonincreasing.
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn max(&self, other: &Self) -> Self {
        self.combine(other, f64::max)
    }

    /// `f ≤ g` pointwise, up to an absolute tolerance.
    pub fn le(&self, other: &Self, tol: f64) -> bool {
        let mut cuts: Vec<f64> = self.breakpoints();
        cuts.extend(other.breakpoints());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut left = 0.0;
        cuts.iter().all(|&c| {
            let mid = 0.5 * (left + c);
            left = c;
            self.eval(mid) <= other.eval(mid) + tol
        })
    }
}
