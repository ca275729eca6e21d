//! Discrete energies of planar profiles `φ`, of `m₂ = cos φ`, and of sphere-valued maps.
//!
//! All three functionals share one quadrature: on each cell the weight is the
//! constant `a_c`, gradient terms are integrated exactly for the cell
//! interpolant, and potential terms use the lumped (trapezoid) node weights
//! `A_i = Σ a_c h_c / 2`. With these choices
//!
//! * `F(sin φ, cos φ, 0) = G(φ)` (sphere maps interpolate along great circles),
//! * `E(cos φ) = G(φ)` for profiles in the sign class (`m₂` interpolates as `cos` of a linear `φ`),
//! * the Hessian of `G` is the tridiagonal operator `L₀` with a diagonal potential.

use crate::error::{Result, WallError};
use crate::grid::Grid;
use crate::linalg::SymTridiagonal;
use crate::scalar::{lit, to_f64, Real};

/// Nodal values of a planar wall `φ` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<'g, T> {
    grid: &'g Grid<T>,
    values: Vec<T>,
}

impl<'g, T: Real> Profile<'g, T> {
    pub fn new(grid: &'g Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(WallError::DimensionMismatch { expected: grid.n_nodes(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at the nodes.
    pub fn from_fn(grid: &'g Grid<T>, f: impl Fn(T) -> T) -> Self {
        Self { grid, values: grid.nodes().iter().map(|&x| f(x)).collect() }
    }

    /// Samples `f` and then imposes the wall constraints exactly:
    /// `φ(-L) = -π/2`, `φ(0) = 0`, `φ(L) = π/2`.
    pub fn pinned_from_fn(grid: &'g Grid<T>, f: impl Fn(T) -> T) -> Self {
        let mut p = Self::from_fn(grid, f);
        p.impose_constraints();
        p
    }

    pub fn grid(&self) -> &'g Grid<T> {
        self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn impose_constraints(&mut self) {
        let n = self.values.len();
        self.values[0] = -T::FRAC_PI_2();
        self.values[n - 1] = T::FRAC_PI_2();
        self.values[self.grid.zero_index()] = T::zero();
    }

    /// Boundary and center constraints hold exactly.
    pub fn satisfies_constraints(&self) -> bool {
        let n = self.values.len();
        self.values[0] == -T::FRAC_PI_2()
            && self.values[n - 1] == T::FRAC_PI_2()
            && self.values[self.grid.zero_index()] == T::zero()
    }

    /// First node where the profile decreases, if any.
    pub fn first_decrease(&self) -> Option<usize> {
        self.values.windows(2).position(|w| w[1] < w[0]).map(|i| i + 1)
    }

    /// Values within `[-π/2, π/2]`, non-positive left of the origin, non-negative right of it.
    pub fn in_sign_class(&self) -> bool {
        let z = self.grid.zero_index();
        let half_pi = T::FRAC_PI_2();
        self.values.iter().enumerate().all(|(i, &v)| {
            v.abs() <= half_pi && (i > z || v <= T::zero()) && (i < z || v >= T::zero())
        })
    }

    /// Per-cell slope `Δφ / Δx`.
    pub fn slopes(&self) -> Vec<T> {
        (0..self.grid.n_cells())
            .map(|c| (self.values[c + 1] - self.values[c]) / self.grid.cell_width(c))
            .collect()
    }

    /// `sup_i |φ_i - ψ_i|`.
    pub fn sup_distance(&self, other: &[T]) -> T {
        self.values.iter().zip(other).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

/// Discrete `G(φ) = Σ_c a_c (Δφ)²/h_c + Σ_i A_i cos² φ_i`.
pub fn energy_g<T: Real>(p: &Profile<'_, T>) -> T {
    let g = p.grid();
    let phi = p.values();
    let mut total = T::zero();
    for c in 0..g.n_cells() {
        let d = phi[c + 1] - phi[c];
        total = total + g.conductance(c) * d * d;
    }
    for (i, &v) in phi.iter().enumerate() {
        let c = v.cos();
        total = total + g.weighted_mass(i) * c * c;
    }
    total
}

/// Gradient of [`energy_g`] at every interior node, the center included.
/// Boundary entries are zero.
pub fn full_gradient_g<T: Real>(p: &Profile<'_, T>) -> Vec<T> {
    let g = p.grid();
    let phi = p.values();
    let two = lit::<T>(2.0);
    let mut grad = vec![T::zero(); phi.len()];
    for i in g.interior() {
        let left = g.conductance(i - 1) * (phi[i] - phi[i - 1]);
        let right = g.conductance(i) * (phi[i + 1] - phi[i]);
        grad[i] = two * (left - right) - g.weighted_mass(i) * (two * phi[i]).sin();
    }
    grad
}

/// Exact gradient of [`energy_g`] with respect to the free nodal values.
/// Constrained nodes (both ends and the pinned center) carry zero.
pub fn gradient_g<T: Real>(p: &Profile<'_, T>) -> Vec<T> {
    let mut grad = full_gradient_g(p);
    grad[p.grid().zero_index()] = T::zero();
    grad
}

/// Hessian of [`energy_g`] restricted to interior nodes (row `k` is node `k + 1`).
pub fn hessian_g<T: Real>(p: &Profile<'_, T>) -> SymTridiagonal<T> {
    let g = p.grid();
    let phi = p.values();
    let n = g.n_nodes() - 2;
    let two = lit::<T>(2.0);
    let mut h = SymTridiagonal::zeros(n);
    for k in 0..n {
        let i = k + 1;
        h.diag[k] = two * (g.conductance(i - 1) + g.conductance(i))
            - two * g.weighted_mass(i) * (two * phi[i]).cos();
        if k + 1 < n {
            h.off[k] = -two * g.conductance(i);
        }
    }
    h
}

/// `Q(η) = ½ d²/dt² G(φ + tη) = Σ_c a_c (Δη)²/h_c − Σ_i A_i cos 2φ_i η_i²`.
pub fn second_variation_g<T: Real>(p: &Profile<'_, T>, eta: &[T]) -> T {
    let g = p.grid();
    let phi = p.values();
    let two = lit::<T>(2.0);
    let mut total = T::zero();
    for c in 0..g.n_cells() {
        let d = eta[c + 1] - eta[c];
        total = total + g.conductance(c) * d * d;
    }
    for (i, (&v, &e)) in phi.iter().zip(eta).enumerate() {
        total = total - g.weighted_mass(i) * (two * v).cos() * e * e;
    }
    total
}

/// `arccos` with the argument clamped into `[-1, 1]`.
fn arc<T: Real>(m: T) -> T {
    m.max(-T::one()).min(T::one()).acos()
}

/// Denominator floor for `1 − m₂²` in derivatives of the convex functional.
pub const CONVEX_FLOOR: f64 = 1e-10;

/// Discrete `E(m₂) = Σ_c a_c (arccos m₂ⱼ − arccos m₂ᵢ)²/h_c + Σ_i A_i m₂ᵢ²`.
///
/// The gradient term is the exact cell integral of `a (∂ₓm₂)²/(1 − m₂²)`
/// along the interpolant that minimizes it, `m₂ = cos` of a linear angle.
pub fn energy_e_convex<T: Real>(g: &Grid<T>, m2: &[T]) -> T {
    let mut total = T::zero();
    for c in 0..g.n_cells() {
        let d = arc(m2[c + 1]) - arc(m2[c]);
        total = total + g.conductance(c) * d * d;
    }
    for (i, &m) in m2.iter().enumerate() {
        total = total + g.weighted_mass(i) * m * m;
    }
    total
}

/// `d arccos(m)/dm = −1/√(1 − m²)` with the floored denominator.
fn arc_prime<T: Real>(m: T) -> T {
    -T::one() / (T::one() - m * m).max(lit(CONVEX_FLOOR)).sqrt()
}

fn arc_second<T: Real>(m: T) -> T {
    let s = (T::one() - m * m).max(lit(CONVEX_FLOOR));
    -m / (s * s.sqrt())
}

/// Gradient of [`energy_e_convex`] at interior nodes; boundary entries are zero.
pub fn gradient_e_convex<T: Real>(g: &Grid<T>, m2: &[T]) -> Vec<T> {
    let two = lit::<T>(2.0);
    let mut grad = vec![T::zero(); m2.len()];
    for i in g.interior() {
        let ai = arc(m2[i]);
        let spring = g.conductance(i - 1) * (ai - arc(m2[i - 1])) + g.conductance(i) * (ai - arc(m2[i + 1]));
        grad[i] = two * spring * arc_prime(m2[i]) + two * g.weighted_mass(i) * m2[i];
    }
    grad
}

/// Hessian of [`energy_e_convex`] on interior nodes (row `k` is node `k + 1`).
pub fn hessian_e_convex<T: Real>(g: &Grid<T>, m2: &[T]) -> SymTridiagonal<T> {
    let two = lit::<T>(2.0);
    let n = g.n_nodes() - 2;
    let mut h = SymTridiagonal::zeros(n);
    for k in 0..n {
        let i = k + 1;
        let ai = arc(m2[i]);
        let dp = arc_prime(m2[i]);
        let spring = g.conductance(i - 1) * (ai - arc(m2[i - 1])) + g.conductance(i) * (ai - arc(m2[i + 1]));
        h.diag[k] = two * (g.conductance(i - 1) + g.conductance(i)) * dp * dp
            + two * spring * arc_second(m2[i])
            + two * g.weighted_mass(i);
        if k + 1 < n {
            h.off[k] = -two * g.conductance(i) * dp * arc_prime(m2[i + 1]);
        }
    }
    h
}

/// Nodal unit vectors `m = (m₁, m₂, m₃)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMap<'g, T> {
    grid: &'g Grid<T>,
    values: Vec<[T; 3]>,
}

pub(crate) fn unit_tolerance<T: Real>() -> T {
    lit::<T>(1e-12).max(T::epsilon() * lit(64.0))
}

fn dot3<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross_norm<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    dot3(&c, &c).sqrt()
}

/// Great-circle angle between two unit vectors.
pub(crate) fn angle<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    cross_norm(a, b).atan2(dot3(a, b))
}

impl<'g, T: Real> SphereMap<'g, T> {
    /// Wraps nodal vectors, checking `|m| = 1` at every node.
    pub fn new(grid: &'g Grid<T>, values: Vec<[T; 3]>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(WallError::DimensionMismatch { expected: grid.n_nodes(), got: values.len() });
        }
        let tol = unit_tolerance::<T>();
        if let Some(node) = values.iter().position(|m| (dot3(m, m).sqrt() - T::one()).abs() > tol) {
            return Err(WallError::InvalidGrid(format!("|m| != 1 at node {node}")));
        }
        Ok(Self { grid, values })
    }

    /// `m = (sin φ, cos φ, 0)`.
    pub fn from_profile(p: &Profile<'g, T>) -> Self {
        let values = p.values().iter().map(|&v| [v.sin(), v.cos(), T::zero()]).collect();
        Self { grid: p.grid(), values }
    }

    pub fn grid(&self) -> &'g Grid<T> {
        self.grid
    }

    pub fn values(&self) -> &[[T; 3]] {
        &self.values
    }

    /// `m(-L) = -e₁`, `m(L) = e₁` and `m(0) = e₂` up to the unit tolerance.
    pub fn satisfies_wall_constraints(&self) -> bool {
        let tol = unit_tolerance::<T>();
        let close = |a: &[T; 3], b: [T; 3]| (0..3).all(|k| (a[k] - b[k]).abs() <= tol);
        let (o, l) = (T::zero(), T::one());
        close(&self.values[0], [-l, o, o])
            && close(self.values.last().expect("nonempty"), [l, o, o])
            && close(&self.values[self.grid.zero_index()], [o, l, o])
    }

    /// Lifting `φ = atan2(m₁, m₂)` for maps with `m₃ = 0`.
    pub fn planar_angles(&self) -> Vec<T> {
        self.values.iter().map(|m| m[0].atan2(m[1])).collect()
    }

    /// Per-cell great-circle angles.
    pub fn cell_angles(&self) -> Vec<T> {
        self.values.windows(2).map(|w| angle(&w[0], &w[1])).collect()
    }
}

/// Discrete `F(m) = Σ_c a_c θ_c²/h_c + Σ_i A_i (m₂² + m₃²)_i`, with `θ_c` the
/// great-circle angle across cell `c`.
pub fn energy_f<T: Real>(m: &SphereMap<'_, T>) -> T {
    let g = m.grid();
    let mut total = T::zero();
    for (c, theta) in m.cell_angles().into_iter().enumerate() {
        total = total + g.conductance(c) * theta * theta;
    }
    for (i, v) in m.values().iter().enumerate() {
        total = total + g.weighted_mass(i) * (v[1] * v[1] + v[2] * v[2]);
    }
    total
}

/// `m ↦ (m₁, √(m₂² + m₃²), 0)`; never increases [`energy_f`].
pub fn reduce_to_planar<'g, T: Real>(m: &SphereMap<'g, T>) -> SphereMap<'g, T> {
    let values = m.values().iter().map(|v| [v[0], v[1].hypot(v[2]), T::zero()]).collect();
    SphereMap { grid: m.grid(), values }
}

/// Second variation of [`energy_f`] along the retraction `(m + t v)/|m + t v|`,
/// for `v` tangential at every node.
pub(crate) fn second_variation_f<T: Real>(m: &SphereMap<'_, T>, v: &[[T; 3]]) -> T {
    let g = m.grid();
    let mv = m.values();
    let half = lit::<T>(0.5);
    let mut total = T::zero();
    for c in 0..g.n_cells() {
        let (mi, mj, vi, vj) = (&mv[c], &mv[c + 1], &v[c], &v[c + 1]);
        let theta = angle(mi, mj);
        let cos_t = theta.cos();
        let c1 = dot3(mi, vj) + dot3(vi, mj);
        let c2 = dot3(vi, vj) - half * (dot3(vi, vi) + dot3(vj, vj)) * cos_t;
        let (shape, ratio) = angle_factors(theta);
        total = total + g.conductance(c) * (c1 * c1 * shape - lit::<T>(2.0) * c2 * ratio);
    }
    for (i, (mi, vi)) in mv.iter().zip(v).enumerate() {
        let transverse = vi[1] * vi[1] + vi[2] * vi[2] - dot3(vi, vi) * (mi[1] * mi[1] + mi[2] * mi[2]);
        total = total + g.weighted_mass(i) * transverse;
    }
    total
}

/// `((sin θ − θ cos θ)/sin³ θ, θ / sin θ)`, with series near `θ = 0`.
pub(crate) fn angle_factors<T: Real>(theta: T) -> (T, T) {
    if theta.abs() < lit(0.05) {
        let t2 = theta * theta;
        (
            lit::<T>(1.0 / 3.0) + t2 * (lit::<T>(2.0 / 15.0) + t2 * (lit::<T>(2.0 / 63.0) + t2 * lit::<T>(4.0 / 675.0))),
            T::one() + t2 * (lit::<T>(1.0 / 6.0) + t2 * (lit::<T>(7.0 / 360.0) + t2 * lit::<T>(31.0 / 15120.0))),
        )
    } else {
        let s = theta.sin();
        ((s - theta * theta.cos()) / (s * s * s), theta / s)
    }
}

/// Relative gap `|F(sin φ, cos φ, 0) − G(φ)| / G(φ)`.
pub fn planar_consistency<T: Real>(p: &Profile<'_, T>) -> f64 {
    let f = energy_f(&SphereMap::from_profile(p));
    let g = energy_g(p);
    to_f64((f - g).abs() / g.abs().max(T::min_positive_value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::Weight;

    fn gd(x: f64) -> f64 {
        (x.tanh()).asin()
    }

    #[test]
    fn homogeneous_wall_energy_is_four() {
        let w = Weight::constant(1.0).unwrap();
        let g = Grid::build(&w, 12.0, 200).unwrap();
        let p = Profile::pinned_from_fn(&g, gd);
        assert!((energy_g(&p) - 4.0).abs() < 1e-3);
    }

    #[test]
    fn energy_is_linear_in_weight() {
        let w = Weight::from_segments(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let w2 = w.scaled(2.0).unwrap();
        let g = Grid::build(&w, 6.0, 40).unwrap();
        let g2 = Grid::build(&w2, 6.0, 40).unwrap();
        let f = |x: f64| (0.7 * x).tanh().asin();
        let e1 = energy_g(&Profile::pinned_from_fn(&g, f));
        let e2 = energy_g(&Profile::pinned_from_fn(&g2, f));
        assert!((e2 - 2.0 * e1).abs() <= 1e-13 * e2);
    }

    #[test]
    fn gradient_vanishes_on_interior_zero_profile() {
        let w = Weight::constant(1.0).unwrap();
        let g = Grid::build(&w, 3.0, 10).unwrap();
        let mut p = Profile::from_fn(&g, |_| 0.0f64);
        p.impose_constraints();
        let grad = gradient_g(&p);
        let n = g.n_nodes();
        for i in 2..n - 2 {
            assert_eq!(grad[i], 0.0, "node {i}");
        }
        // only the cells touching the boundary feel the pinned ±π/2
        assert!(grad[1] != 0.0 && grad[n - 2] != 0.0);
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let w = Weight::from_segments(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let g = Grid::build(&w, 3.0, 8).unwrap();
        let p = Profile::pinned_from_fn(&g, |x: f64| (0.9 * x).tanh().asin());
        let h = hessian_g(&p);
        let n = g.n_nodes();
        let t = 1e-6;
        for j in [3usize, 10, 20, 30] {
            let mut plus = p.clone();
            plus.values_mut()[j] += t;
            let mut minus = p.clone();
            minus.values_mut()[j] -= t;
            let gp = full_gradient_g(&plus);
            let gm = full_gradient_g(&minus);
            for i in 1..n - 1 {
                let fd = (gp[i] - gm[i]) / (2.0 * t);
                let exact: f64 = if i == j {
                    h.diag[i - 1]
                } else if i + 1 == j {
                    h.off[i - 1]
                } else if j + 1 == i {
                    h.off[j - 1]
                } else {
                    0.0
                };
                assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "({i},{j}) {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn second_variation_is_half_hessian_form() {
        let w = Weight::from_segments(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let g = Grid::build(&w, 3.0, 8).unwrap();
        let p = Profile::pinned_from_fn(&g, |x: f64| (0.9 * x).tanh().asin());
        let n = g.n_nodes();
        let eta: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { 0.0 } else { ((i * 7) % 5) as f64 - 2.0 }).collect();
        let h = hessian_g(&p);
        let q = second_variation_g(&p, &eta);
        assert!((q - 0.5 * h.quadratic_form(&eta[1..n - 1])).abs() < 1e-10 * q.abs().max(1.0));
    }

    #[test]
    fn convex_form_equals_g_on_monotone_profiles() {
        let w = Weight::from_segments(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let g = Grid::build(&w, 12.0, 200).unwrap();
        let p = Profile::pinned_from_fn(&g, gd);
        let m2: Vec<f64> = p.values().iter().map(|v| v.cos()).collect();
        let e = energy_e_convex(&g, &m2);
        let gg = energy_g(&p);
        assert!((e - gg).abs() <= 1e-12 * gg);
        let w1 = Weight::constant(1.0).unwrap();
        let g1 = Grid::build(&w1, 12.0, 200).unwrap();
        let p1 = Profile::pinned_from_fn(&g1, gd);
        let m21: Vec<f64> = p1.values().iter().map(|v| v.cos()).collect();
        assert!((energy_e_convex(&g1, &m21) - 4.0).abs() < 1e-3);
    }

    #[test]
    fn convex_form_with_flat_interior() {
        let w = Weight::constant(1.0).unwrap();
        let g = Grid::build(&w, 3.0, 10).unwrap();
        let mut m2 = vec![0.0; g.n_nodes()];
        m2[g.zero_index()] = 1.0;
        // only the two center cells carry a gradient term, each (π/2)² a/h
        let expected = 2.0 * 10.0 * std::f64::consts::FRAC_PI_4.powi(2) * 4.0 + 0.1;
        assert!((energy_e_convex(&g, &m2) - expected).abs() < 1e-12);
    }

    #[test]
    fn sphere_energy_of_planar_lift() {
        let w = Weight::from_segments(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let g = Grid::build(&w, 12.0, 100).unwrap();
        let p = Profile::pinned_from_fn(&g, |x: f64| (1.3 * x).tanh().asin());
        assert!(planar_consistency(&p) < 1e-12);
        let m = SphereMap::from_profile(&p);
        assert!(m.satisfies_wall_constraints());
    }

    #[test]
    fn rotation_about_e1_keeps_energy() {
        let w = Weight::from_segments(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let g = Grid::build(&w, 6.0, 50).unwrap();
        let p = Profile::pinned_from_fn(&g, gd);
        let m = SphereMap::from_profile(&p);
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let rotated: Vec<[f64; 3]> = m.values().iter().map(|v| [v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]]).collect();
        let r = SphereMap::new(&g, rotated).unwrap();
        assert!((energy_f(&r) - energy_f(&m)).abs() < 1e-12 * energy_f(&m));
    }

    #[test]
    fn constant_map_energy_is_weight_integral() {
        let w = Weight::from_segments(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let g = Grid::build(&w, 6.0, 20).unwrap();
        let m = SphereMap::new(&g, vec![[0.0f64, 1.0, 0.0]; g.n_nodes()]).unwrap();
        assert!((energy_f(&m) - 14.0).abs() < 1e-12);
        assert!(!m.satisfies_wall_constraints());
    }

    #[test]
    fn planar_reduction() {
        let w = Weight::constant(1.0).unwrap();
        let g = Grid::build(&w, 6.0, 50).unwrap();
        let p = Profile::pinned_from_fn(&g, gd);
        let m = SphereMap::from_profile(&p);
        let r = reduce_to_planar(&m);
        for (a, b) in m.values().iter().zip(r.values()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-15);
            }
        }
        // twisting the (m₂, m₃) components costs energy that the reduction removes
        let twisted: Vec<[f64; 3]> = p
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(&phi, &x)| {
                let th = 0.8 * x.sin();
                [phi.sin(), phi.cos() * th.cos(), phi.cos() * th.sin()]
            })
            .collect();
        let t = SphereMap::new(&g, twisted).unwrap();
        let tr = reduce_to_planar(&t);
        assert!(energy_f(&tr) < energy_f(&t) - 1e-3);
        // negative m₂ gets folded up
        let flipped: Vec<[f64; 3]> = m.values().iter().map(|v| [v[0], -v[1], v[2]]).collect();
        let f = SphereMap::new(&g, flipped).unwrap();
        assert!(reduce_to_planar(&f).values().iter().all(|v| v[1] >= 0.0));
    }

    #[test]
    fn generic_over_f32() {
        let w = Weight::<f32>::constant(1.0).unwrap();
        let g = Grid::build(&w, 10.0, 50).unwrap();
        let p = Profile::pinned_from_fn(&g, |x: f32| x.tanh().asin());
        assert!((energy_g(&p) - 4.0).abs() < 1e-2);
    }

    #[test]
    fn angle_factor_series_is_continuous() {
        let (a0, b0) = angle_factors(0.04999f64);
        let (a1, b1) = angle_factors(0.05001f64);
        assert!((a0 - a1).abs() < 1e-5);
        assert!((b0 - b1).abs() < 1e-5);
        let (a, b) = angle_factors(0.05f64);
        let exact = ((0.05f64.sin() - 0.05 * 0.05f64.cos()) / 0.05f64.sin().powi(3), 0.05 / 0.05f64.sin());
        assert!((a - exact.0).abs() < 1e-12 && (b - exact.1).abs() < 1e-14);
    }
}
