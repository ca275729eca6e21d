//! Closed-form reference walls.
//!
//! * the homogeneous (Gudermannian) wall `φ(x) = π/2 − 2 arctan(e^{−(x−x₀)})`, solving `φ' = cos φ`;
//! * the wall of the step weight `a = 2` on `(−1, 1)`, `a = 1` outside, built from its two
//!   first integrals: `φ' = √(cos²φ + d² − 1)` on `(0, 1)` and `φ' = cos φ` on `(1, ∞)`,
//!   with the center slope `d` fixed by continuity of the flux `a φ'` at `x = 1`.

use crate::error::{Result, WallError};
use crate::quadrature::{adaptive_simpson, bisect};
use crate::scalar::{lit, to_f64, Real};
use crate::weight::Weight;

/// A wall known in closed form on the whole line.
pub trait ClosedFormWall<T: Real> {
    fn phi(&self, x: T) -> T;
    /// `∂ₓφ`.
    fn slope(&self, x: T) -> T;
    /// Flux `a(x) ∂ₓφ`, continuous across jumps of `a`.
    fn flux(&self, x: T) -> T;
}

/// Gudermannian function `gd(s) = 2 arctan(tanh(s/2))`, exactly odd in floating point.
pub fn gudermannian<T: Real>(s: T) -> T {
    lit::<T>(2.0) * (s * lit(0.5)).tanh().atan()
}

/// Homogeneous wall centered at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousWall<T> {
    pub x0: T,
}

impl<T: Real> HomogeneousWall<T> {
    pub fn new(x0: T) -> Self {
        Self { x0 }
    }

    /// `∫_ℝ (φ'² + cos²φ) dx` for `a ≡ 1`.
    pub fn energy(&self) -> T {
        lit(4.0)
    }
}

impl<T: Real> ClosedFormWall<T> for HomogeneousWall<T> {
    fn phi(&self, x: T) -> T {
        gudermannian(x - self.x0)
    }

    fn slope(&self, x: T) -> T {
        // d/dx [π/2 − 2 arctan(e^{−s})] = 2e^{−s}/(1 + e^{−2s}) = sech s
        T::one() / (x - self.x0).cosh()
    }

    fn flux(&self, x: T) -> T {
        self.slope(x)
    }
}

/// `Φ(d) = ∫₀^{θ(d)} dt/√(cos²t + d² − 1) − 1` with `θ(d) = arccos √(4(1 − d²)/3)`.
pub fn step_matching_residual<T: Real>(d: T, tol: T) -> Result<T> {
    let upper = step_upper_limit(d);
    let shift = d * d - T::one();
    let x = adaptive_simpson(|t: T| T::one() / (t.cos() * t.cos() + shift).sqrt(), T::zero(), upper, tol)?;
    Ok(x - T::one())
}

/// `θ(d) = arccos √(4(1 − d²)/3)`, the value of `φ(1)` for a wall with center slope `d`.
pub fn step_upper_limit<T: Real>(d: T) -> T {
    (lit::<T>(4.0) * (T::one() - d * d) / lit(3.0)).sqrt().min(T::one()).acos()
}

pub const STEP_QUADRATURE_TOL: f64 = 1e-13;
pub const STEP_ROOT_TOL: f64 = 1e-12;
pub const STEP_TABLE_SAMPLES: usize = 2000;

/// Center slope `d ∈ (1/2, 1)` of the step-weight wall.
pub fn step_weight_d<T: Real>() -> Result<T> {
    step_weight_d_with_tolerance(lit(STEP_QUADRATURE_TOL))
}

/// [`step_weight_d`] with an explicit quadrature tolerance.
pub fn step_weight_d_with_tolerance<T: Real>(tol: T) -> Result<T> {
    let half = lit::<T>(0.5);
    let mut samples = vec![half + lit(1e-3)];
    for k in 1..64 {
        samples.push(half + half * lit::<T>(k as f64) / lit(64.0));
    }
    samples.push(T::one() - lit(1e-6));
    let mut prev = (samples[0], step_matching_residual(samples[0], tol)?);
    for &d in &samples[1..] {
        let value = step_matching_residual(d, tol)?;
        if prev.1 < T::zero() && value >= T::zero() {
            return bisect(|d| step_matching_residual(d, tol), prev.0, d, lit(STEP_ROOT_TOL));
        }
        prev = (d, value);
    }
    Err(WallError::NoSignChange("step-weight matching equation on (1/2, 1)".into()))
}

/// Wall of the even step weight `a = 2` on `(−1, 1)`, `a = 1` on `ℝ ∖ [−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepWallClosedForm<T> {
    /// Center slope `lim_{x↘0} ∂ₓφ`.
    pub d: T,
    /// `φ(1) = arccos √(4(1 − d²)/3)`.
    pub phi_at_1: T,
    /// Samples `(φ_k, x(φ_k))` of `x(φ) = ∫₀^φ dt/√(cos²t + d² − 1)` on `[0, φ(1)]`.
    pub inner_inverse_table: Vec<(T, T)>,
    /// `c` with `tanh(1 − c) = sin φ(1)`, so that `φ(x) = gd(x − c)` on `(1, ∞)`.
    pub outer_shift: T,
}

impl<T: Real> StepWallClosedForm<T> {
    pub fn build() -> Result<Self> {
        Self::build_with_tolerance(lit(STEP_QUADRATURE_TOL))
    }

    pub fn build_with_tolerance(tol: T) -> Result<Self> {
        let d = step_weight_d_with_tolerance(tol)?;
        let phi_at_1 = step_upper_limit(d);
        let shift = d * d - T::one();
        let n = STEP_TABLE_SAMPLES;
        let mut table = Vec::with_capacity(n + 1);
        table.push((T::zero(), T::zero()));
        let mut x = T::zero();
        for k in 1..=n {
            let lo = phi_at_1 * lit::<T>((k - 1) as f64) / lit(n as f64);
            let hi = if k == n { phi_at_1 } else { phi_at_1 * lit::<T>(k as f64) / lit(n as f64) };
            x = x + adaptive_simpson(|t: T| T::one() / (t.cos() * t.cos() + shift).sqrt(), lo, hi, tol / lit(n as f64))?;
            table.push((hi, x));
        }
        let outer_shift = T::one() - phi_at_1.sin().atanh();
        Ok(Self { d, phi_at_1, inner_inverse_table: table, outer_shift })
    }

    /// The weight this wall belongs to.
    pub fn weight() -> Weight<T> {
        Weight::from_segments(vec![-T::one(), T::one()], vec![T::one(), lit(2.0), T::one()])
            .expect("valid step weight")
    }

    fn inner_slope(&self, phi: T) -> T {
        let c = phi.cos();
        (c * c + self.d * self.d - T::one()).max(T::zero()).sqrt()
    }

    /// `x(φ(1))`, which equals 1 up to the root and quadrature tolerances.
    pub fn table_extent(&self) -> T {
        self.inner_inverse_table.last().expect("nonempty").1
    }

    /// `cos φ(1) − 2√(cos²φ(1) + d² − 1)`: flux continuity at `x = 1`.
    pub fn matching_defect(&self) -> T {
        self.phi_at_1.cos() - lit::<T>(2.0) * self.inner_slope(self.phi_at_1)
    }

    /// Inverts the inner table at `x ∈ [0, 1]` by cubic Hermite interpolation
    /// with exact slopes `dφ/dx`, limited to stay monotone.
    fn inner_phi(&self, x: T) -> T {
        let table = &self.inner_inverse_table;
        let k = table.partition_point(|&(_, xk)| xk <= x).clamp(1, table.len() - 1);
        let (p0, x0) = table[k - 1];
        let (p1, x1) = table[k];
        let dx = x1 - x0;
        let secant = (p1 - p0) / dx;
        let (mut m0, mut m1) = (self.inner_slope(p0), self.inner_slope(p1));
        if secant > T::zero() {
            let (alpha, beta) = (m0 / secant, m1 / secant);
            let r = alpha * alpha + beta * beta;
            if r > lit(9.0) {
                let tau = lit::<T>(3.0) / r.sqrt();
                m0 = tau * alpha * secant;
                m1 = tau * beta * secant;
            }
        }
        let s = (x - x0) / dx;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        h00 * p0 + h10 * dx * m0 + h01 * p1 + h11 * dx * m1
    }

    fn phi_positive(&self, x: T) -> T {
        if x <= T::one() {
            self.inner_phi(x)
        } else {
            gudermannian(x - self.outer_shift)
        }
    }
}

impl<T: Real> ClosedFormWall<T> for StepWallClosedForm<T> {
    fn phi(&self, x: T) -> T {
        if x < T::zero() {
            -self.phi_positive(-x)
        } else {
            self.phi_positive(x)
        }
    }

    fn slope(&self, x: T) -> T {
        let phi = self.phi(x);
        if x.abs() < T::one() {
            self.inner_slope(phi)
        } else {
            phi.cos()
        }
    }

    fn flux(&self, x: T) -> T {
        let phi = self.phi(x);
        if x.abs() < T::one() {
            lit::<T>(2.0) * self.inner_slope(phi)
        } else {
            phi.cos()
        }
    }
}

/// `G(φ̂) = 4 + 2[sin φ̂]₋₁¹` for the homogeneous wall centered at `x0` under the step weight.
pub fn translated_wall_energy<T: Real>(x0: T) -> T {
    lit::<T>(4.0) + translated_wall_gap(x0)
}

/// `2[sin φ̂]₋₁¹ = 2(tanh(1 − x0) + tanh(1 + x0)) = 2 sinh 2 / (cosh(1 − x0) cosh(1 + x0))`,
/// the excess of [`translated_wall_energy`] over 4, without cancellation.
pub fn translated_wall_gap<T: Real>(x0: T) -> T {
    let two = lit::<T>(2.0);
    two * two.sinh() / ((T::one() - x0).cosh() * (T::one() + x0).cosh())
}

/// Direct quadrature of `∫ a (φ'² + cos²φ) dx` for the translated homogeneous wall
/// under `weight`, integrated segment by segment over `x0 ± 40`.
pub fn translated_wall_energy_quadrature<T: Real>(weight: &Weight<T>, x0: T) -> Result<T> {
    let wall = HomogeneousWall::new(x0);
    let reach = lit::<T>(40.0);
    let (lo, hi) = (x0 - reach - weight.breakpoints().iter().fold(T::zero(), |m, b| m.max(b.abs())),
        x0 + reach + weight.breakpoints().iter().fold(T::zero(), |m, b| m.max(b.abs())));
    let mut cuts = vec![lo];
    cuts.extend(weight.breakpoints().iter().copied().filter(|&b| b > lo && b < hi));
    cuts.push(hi);
    let mut total = T::zero();
    for w in cuts.windows(2) {
        let a = weight.eval((w[0] + w[1]) * lit(0.5));
        let integrand = |x: T| {
            let s = wall.slope(x);
            let c = wall.phi(x).cos();
            s * s + c * c
        };
        total = total + a * adaptive_simpson(integrand, w[0], w[1], lit(1e-12))?;
    }
    if !total.is_finite() {
        return Err(WallError::Quadrature(format!("translated wall at x0 = {}", to_f64(x0))));
    }
    Ok(total)
}
