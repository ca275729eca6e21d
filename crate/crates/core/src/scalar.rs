//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the solvers are written against (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Lossy view of a scalar as `f64`, used for reporting and error payloads.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn max_abs<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}
