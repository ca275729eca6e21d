//! Adaptive Simpson quadrature and bracketing bisection.

use crate::error::{Result, WallError};
use crate::scalar::{lit, to_f64, Real};

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let half = lit::<T>(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let value = refine(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(WallError::Quadrature(format!("non-finite integral on [{}, {}]", to_f64(a), to_f64(b))))
    }
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / lit(6.0) * (fa + lit::<T>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T {
    let half = lit::<T>(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= lit::<T>(15.0) * tol {
        return left + right + delta / lit(15.0);
    }
    refine(f, a, m, fa, flm, fm, left, tol * half, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, tol * half, depth - 1)
}

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite signs,
/// stopped once the bracket is narrower than `tol`.
pub fn bisect<T: Real>(f: impl Fn(T) -> Result<T>, mut lo: T, mut hi: T, tol: T) -> Result<T> {
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(WallError::NoSignChange(format!("bracket [{}, {}]", to_f64(lo), to_f64(hi))));
    }
    let half = lit::<T>(0.5);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * half)
}
