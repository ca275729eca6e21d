//! Piecewise-constant coercive weights `a(x)`.
//!
//! A weight is described by its jump positions and one value per segment,
//! including the two unbounded end segments. Evaluation is right-continuous.

use crate::error::{Result, WallError};
use crate::scalar::{to_f64, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct Weight<T> {
    breakpoints: Vec<T>,
    segment_values: Vec<T>,
    a_lower: T,
    a_upper: T,
}

/// Structural facts about a weight, derived from its segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightTraits {
    pub is_even: bool,
    pub is_nondecreasing_on_positive: bool,
}

impl<T: Real> Weight<T> {
    /// Builds a weight from jump positions and per-segment values.
    pub fn from_segments(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(WallError::SegmentCountMismatch {
                expected: breakpoints.len() + 1,
                got: values.len(),
            });
        }
        if let Some(index) = breakpoints.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(WallError::UnsortedBreakpoints { index: index + 1 });
        }
        if let Some(index) = breakpoints.iter().position(|b| !b.is_finite()) {
            return Err(WallError::UnsortedBreakpoints { index });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(WallError::NonPositiveValue { index, value: to_f64(value) });
            }
        }
        let a_lower = values.iter().copied().fold(T::infinity(), T::min);
        let a_upper = values.iter().copied().fold(T::neg_infinity(), T::max);
        Ok(Self { breakpoints, segment_values: values, a_lower, a_upper })
    }

    /// The constant weight `a ≡ value`.
    pub fn constant(value: T) -> Result<Self> {
        Self::from_segments(Vec::new(), vec![value])
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn segment_values(&self) -> &[T] {
        &self.segment_values
    }

    /// Essential infimum `a₀`.
    pub fn a_lower(&self) -> T {
        self.a_lower
    }

    /// Essential supremum `A₀`.
    pub fn a_upper(&self) -> T {
        self.a_upper
    }

    /// Index of the segment containing `x`; a breakpoint belongs to the segment on its right.
    pub fn segment_index(&self, x: T) -> usize {
        self.breakpoints.partition_point(|&b| b <= x)
    }

    pub fn eval(&self, x: T) -> T {
        self.segment_values[self.segment_index(x)]
    }

    pub fn is_constant(&self) -> bool {
        self.a_lower == self.a_upper
    }

    /// Reflection `x ↦ -x`.
    pub fn mirror(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().rev().map(|&b| -b).collect(),
            segment_values: self.segment_values.iter().rev().copied().collect(),
            a_lower: self.a_lower,
            a_upper: self.a_upper,
        }
    }

    /// Scales every segment value by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::from_segments(
            self.breakpoints.clone(),
            self.segment_values.iter().map(|&v| v * factor).collect(),
        )
    }

    /// Same function with redundant breakpoints (equal values on both sides) removed.
    fn canonical(&self) -> (Vec<T>, Vec<T>) {
        let mut breakpoints = Vec::with_capacity(self.breakpoints.len());
        let mut values = vec![self.segment_values[0]];
        for (b, &v) in self.breakpoints.iter().zip(&self.segment_values[1..]) {
            if v != *values.last().expect("nonempty") {
                breakpoints.push(*b);
                values.push(v);
            }
        }
        (breakpoints, values)
    }

    pub fn classify(&self) -> WeightTraits {
        let (breakpoints, values) = self.canonical();
        let n = breakpoints.len();
        let symmetric_breaks = (0..n).all(|i| breakpoints[i] == -breakpoints[n - 1 - i]);
        let symmetric_values = (0..values.len()).all(|k| values[k] == values[values.len() - 1 - k]);

        // first segment meeting (0, ∞): the one containing 0 under right-continuity
        let start = breakpoints.partition_point(|&b| b <= T::zero());
        let nondecreasing = values[start..].windows(2).all(|w| w[0] <= w[1]);

        WeightTraits { is_even: symmetric_breaks && symmetric_values, is_nondecreasing_on_positive: nondecreasing }
    }
}
