//! Second-variation operators `L₀, L₁, L₂`, their smallest eigenpairs, the
//! discrete Hardy decomposition, and the instability witness of the step weight.
//!
//! Every operator acts on nodal vectors as
//! `(A v)ᵢ = κ_L (vᵢ − v_{i−1}) + κ_R (vᵢ − v_{i+1}) + Vᵢ Mᵢ vᵢ`
//! with Dirichlet ends, so `(A v, v) = Σ_c κ_c (Δv)² + Σᵢ Vᵢ Mᵢ vᵢ²` exactly.
//! `L₀` is half the Hessian of `G`. `L₁` and `L₂` come from the second variation
//! of the sphere energy along great circles, which replaces `κ_c` by
//! `κ̃_c = κ_c θ_c / sin θ_c` (`θ_c = |Δφ|`) and sets the multiplier to
//! `Λᵢ = Σ_adj κ̃_c (1 − cos θ_c) + Aᵢ cos² φᵢ`.

use crate::energy::{angle_factors, second_variation_f, second_variation_g, Profile, SphereMap};
use crate::error::{Result, WallError};
use crate::grid::Grid;
use crate::linalg::{dot, norm, SymTridiagonal};
use crate::oracles::{ClosedFormWall, StepWallClosedForm};
use crate::scalar::{lit, max_abs, to_f64, Real};
use crate::solver::{residual_g, VERIFY_RESIDUAL_TOLERANCE};
use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    L0,
    L1,
    L2,
}

impl OperatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::L0 => "L0",
            OperatorKind::L1 => "L1",
            OperatorKind::L2 => "L2",
        }
    }
}

/// Deliberate defects for mutation testing of the acceptance suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Flips the sign of the `L₀` potential.
    FlipL0Potential,
}

/// `λᵢ = Λᵢ / Mᵢ`, the discrete `a |∂ₓm|² + a m₂²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeMultiplier<T> {
    pub nodal_values: Vec<T>,
}

impl<T: Real> LagrangeMultiplier<T> {
    pub fn from_profile(p: &Profile<'_, T>) -> Self {
        let g = p.grid();
        let lambda = multiplier_weights(g, p.values(), &modified_conductances(g, p.values()));
        Self { nodal_values: lambda.iter().enumerate().map(|(i, &l)| l / g.node_mass(i)).collect() }
    }

    /// `0 ≤ λᵢ ≤ a_upper (1 + s²)(1 + θ²/6)`, with `s` and `θ` the largest cell slope and
    /// cell angle; the last factor covers `θ tan(θ/2) ≥ θ²/2`.
    pub fn within_bounds(&self, w: &Weight<T>, p: &Profile<'_, T>) -> bool {
        let s = max_abs(p.slopes());
        let theta = max_abs(p.values().windows(2).map(|v| v[1] - v[0]));
        let bound = w.a_upper() * (T::one() + s * s) * (T::one() + theta * theta / lit(6.0));
        self.nodal_values.iter().all(|&l| l >= T::zero() && l <= bound)
    }
}

fn modified_conductances<T: Real>(g: &Grid<T>, phi: &[T]) -> Vec<T> {
    (0..g.n_cells()).map(|c| g.conductance(c) * angle_factors((phi[c + 1] - phi[c]).abs()).1).collect()
}

/// `Λᵢ = Σ_adj κ̃_c (1 − cos θ_c) + Aᵢ cos² φᵢ`.
fn multiplier_weights<T: Real>(g: &Grid<T>, phi: &[T], kt: &[T]) -> Vec<T> {
    let n = g.n_nodes();
    let bend: Vec<T> = (0..g.n_cells()).map(|c| kt[c] * (T::one() - (phi[c + 1] - phi[c]).cos())).collect();
    (0..n)
        .map(|i| {
            let mut l = g.weighted_mass(i) * phi[i].cos() * phi[i].cos();
            if i > 0 {
                l = l + bend[i - 1];
            }
            if i + 1 < n {
                l = l + bend[i];
            }
            l
        })
        .collect()
}

/// Symmetric tridiagonal operator on nodal vectors with Dirichlet ends.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator<'g, T> {
    pub grid: &'g Grid<T>,
    pub kind: OperatorKind,
    /// Interior block (row `k` is node `k + 1`).
    pub matrix: SymTridiagonal<T>,
    /// Lumped node masses `Mᵢ`, all nodes.
    pub mass: Vec<T>,
    /// Cell conductances `κ_c`.
    pub conductances: Vec<T>,
    /// Nodal potentials `Vᵢ`, all nodes.
    pub potentials: Vec<T>,
}

impl<'g, T: Real> TridiagonalOperator<'g, T> {
    /// Builds the operator from nodal angles without checking that they solve the wall equation.
    pub fn from_angles(kind: OperatorKind, g: &'g Grid<T>, phi: &[T], mutation: Mutation) -> Self {
        let n = g.n_nodes();
        let mass: Vec<T> = (0..n).map(|i| g.node_mass(i)).collect();
        let weighted: Vec<T> = (0..n).map(|i| g.weighted_mass(i)).collect();
        let two = lit::<T>(2.0);
        let (conductances, scaled_potential): (Vec<T>, Vec<T>) = match kind {
            OperatorKind::L0 => {
                let sign = if mutation == Mutation::FlipL0Potential { T::one() } else { -T::one() };
                ((0..g.n_cells()).map(|c| g.conductance(c)).collect(),
                    (0..n).map(|i| sign * weighted[i] * (two * phi[i]).cos()).collect())
            }
            OperatorKind::L1 | OperatorKind::L2 => {
                let kt = modified_conductances(g, phi);
                let lambda = multiplier_weights(g, phi, &kt);
                let shift = kind == OperatorKind::L2;
                let pot = (0..n).map(|i| if shift { weighted[i] - lambda[i] } else { -lambda[i] }).collect();
                (kt, pot)
            }
        };
        let potentials: Vec<T> = scaled_potential.iter().zip(&mass).map(|(&v, &m)| v / m).collect();
        let mut matrix = SymTridiagonal::zeros(n - 2);
        for k in 0..n - 2 {
            let i = k + 1;
            matrix.diag[k] = conductances[i - 1] + conductances[i] + scaled_potential[i];
            if k + 1 < n - 2 {
                matrix.off[k] = -conductances[i];
            }
        }
        Self { grid: g, kind, matrix, mass, conductances, potentials }
    }

    /// `(A v)ᵢ` at interior nodes; boundary rows are zero.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.mass.len();
        let mut out = vec![T::zero(); n];
        for i in 1..n - 1 {
            out[i] = self.conductances[i - 1] * (v[i] - v[i - 1])
                + self.conductances[i] * (v[i] - v[i + 1])
                + self.potentials[i] * self.mass[i] * v[i];
        }
        out
    }

    /// Summation-by-parts form `Σ_c κ_c (Δv)² + Σᵢ Vᵢ Mᵢ vᵢ²` over all cells and interior nodes.
    pub fn pairing(&self, v: &[T]) -> T {
        let n = self.mass.len();
        let mut total = T::zero();
        for c in 0..n - 1 {
            let d = v[c + 1] - v[c];
            total = total + self.conductances[c] * d * d;
        }
        for i in 1..n - 1 {
            total = total + self.potentials[i] * self.mass[i] * v[i] * v[i];
        }
        total
    }

    /// `(A u, v)` through [`apply`](Self::apply).
    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        dot(&self.apply(u), v)
    }

    /// `max_i |(A v)ᵢ| / Mᵢ` over interior nodes.
    pub fn scaled_residual(&self, v: &[T], skip: impl Fn(usize) -> bool) -> T {
        let av = self.apply(v);
        max_abs((1..av.len() - 1).filter(|&i| !skip(i)).map(|i| av[i] / self.mass[i]))
    }
}

/// Assembles an operator around a converged wall.
pub fn assemble_operator<'g, T: Real>(
    kind: OperatorKind,
    w: &Weight<T>,
    p: &Profile<'g, T>,
) -> Result<TridiagonalOperator<'g, T>> {
    assemble_operator_with(kind, w, p, Mutation::None)
}

pub fn assemble_operator_with<'g, T: Real>(
    kind: OperatorKind,
    _w: &Weight<T>,
    p: &Profile<'g, T>,
    mutation: Mutation,
) -> Result<TridiagonalOperator<'g, T>> {
    let residual = residual_g(p);
    if !(residual <= VERIFY_RESIDUAL_TOLERANCE) {
        return Err(WallError::ProfileNotConverged { residual });
    }
    Ok(TridiagonalOperator::from_angles(kind, p.grid(), p.values(), mutation))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport<T> {
    pub kind: OperatorKind,
    pub smallest_eigenvalue: T,
    /// Nodal eigenvector, zero at the ends (and at the center when pinned), `M`-normalized.
    pub eigenvector: Vec<T>,
    pub converged: bool,
    /// `‖A v − λ M v‖ / ‖v‖`.
    pub residual: f64,
    pub center_pinned: bool,
}

const EIGEN_RESIDUAL: f64 = 1e-8;
const MAX_INVERSE_ITERATIONS: usize = 100;

/// Smallest generalized eigenpair of `(A, M)`. `L₁` is restricted to vectors
/// vanishing at the center node.
pub fn smallest_eigenpair<T: Real>(op: &TridiagonalOperator<'_, T>) -> Result<StabilityReport<T>> {
    smallest_eigenpair_with(op, op.kind == OperatorKind::L1)
}

pub fn smallest_eigenpair_with<T: Real>(op: &TridiagonalOperator<'_, T>, pin_center: bool) -> Result<StabilityReport<T>> {
    let n = op.mass.len();
    let center_row = op.grid.zero_index() - 1;
    let mut rows: Vec<usize> = (0..n - 2).collect();
    let mut a = op.matrix.clone();
    if pin_center {
        a = a.without_index(center_row);
        rows.remove(center_row);
    }
    let scale: Vec<T> = rows.iter().map(|&k| T::one() / op.mass[k + 1].sqrt()).collect();
    let mut b = a.clone();
    for k in 0..b.len() {
        b.diag[k] = a.diag[k] * scale[k] * scale[k];
        if k + 1 < b.len() {
            b.off[k] = a.off[k] * scale[k] * scale[k + 1];
        }
    }
    let (mut lo, mut hi) = b.gershgorin();
    let spread = hi.abs().max(lo.abs()).max(T::one());
    for _ in 0..400 {
        if hi - lo <= lit::<T>(4.0) * T::epsilon() * spread {
            break;
        }
        let mid = (lo + hi) * lit(0.5);
        if b.sturm_count(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut gap = spread * lit(1e-10);
    let mut x = vec![T::one(); b.len()];
    let mut shifted;
    loop {
        shifted = b.clone();
        for d in shifted.diag.iter_mut() {
            *d = *d - (lo - gap);
        }
        if shifted.solve_spd(&x).is_some() {
            break;
        }
        gap = gap * lit(10.0);
    }
    let mut rayleigh = hi;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        let y = shifted.solve_spd(&x).expect("positive definite shift");
        let ny = norm(&y);
        x = y.iter().map(|&v| v / ny).collect();
        let bx = b.mul_vec(&x);
        rayleigh = dot(&bx, &x);
        // residual of the generalized problem for v = S x
        let v: Vec<T> = x.iter().zip(&scale).map(|(&a, &s)| a * s).collect();
        let av = a.mul_vec(&v);
        let r: Vec<T> = rows.iter().enumerate().map(|(k, &row)| av[k] - rayleigh * op.mass[row + 1] * v[k]).collect();
        residual = to_f64(norm(&r) / norm(&v));
        if residual <= EIGEN_RESIDUAL * 1e-3 {
            break;
        }
    }
    if !(residual <= EIGEN_RESIDUAL) {
        return Err(WallError::EigenNoConvergence { residual });
    }
    let mut eigenvector = vec![T::zero(); n];
    for (k, &row) in rows.iter().enumerate() {
        eigenvector[row + 1] = x[k] * scale[k];
    }
    let total = eigenvector.iter().fold(T::zero(), |s, &v| s + v);
    if total < T::zero() {
        eigenvector.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(StabilityReport {
        kind: op.kind,
        smallest_eigenvalue: rayleigh,
        eigenvector,
        converged: true,
        residual,
        center_pinned: pin_center,
    })
}

/// `(A η, η) = (A ψ, ψ η̂²) + Σ_c κ_c ψᵢ ψⱼ (Δη̂)²` with `η̂ = η/ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyDecomposition<T> {
    pub quadratic: T,
    pub potential_part: T,
    pub gradient_part: T,
}

impl<T: Real> HardyDecomposition<T> {
    pub fn residual(&self) -> T {
        (self.quadratic - self.potential_part - self.gradient_part).abs()
    }
}

pub fn hardy_decomposition<T: Real>(
    op: &TridiagonalOperator<'_, T>,
    psi: &[T],
    eta: &[T],
) -> Result<HardyDecomposition<T>> {
    let n = op.mass.len();
    for v in [psi, eta] {
        if v.len() != n {
            return Err(WallError::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    if let Some(node) = psi.iter().position(|&v| !(v > T::zero())) {
        return Err(WallError::NonPositivePsi { node });
    }
    let mut eta = eta.to_vec();
    eta[0] = T::zero();
    eta[n - 1] = T::zero();
    let hat: Vec<T> = eta.iter().zip(psi).map(|(&e, &p)| e / p).collect();
    let weighted: Vec<T> = psi.iter().zip(&hat).map(|(&p, &h)| p * h * h).collect();
    let mut gradient_part = T::zero();
    for c in 0..n - 1 {
        let d = hat[c + 1] - hat[c];
        gradient_part = gradient_part + op.conductances[c] * psi[c] * psi[c + 1] * d * d;
    }
    Ok(HardyDecomposition { quadratic: op.pairing(&eta), potential_part: op.inner(psi, &weighted), gradient_part })
}

/// Absolute defect of the discrete Hardy identity; `η` is taken with zero ends.
pub fn hardy_residual<T: Real>(op: &TridiagonalOperator<'_, T>, psi: &[T], eta: &[T]) -> Result<T> {
    Ok(hardy_decomposition(op, psi, eta)?.residual())
}

/// Cubic smoothstep cutoff: 1 at `s ≤ 0`, 0 at `s ≥ 1`.
pub fn smoothstep_cutoff<T: Real>(s: T) -> T {
    if s <= T::zero() {
        T::one()
    } else if s >= T::one() {
        T::zero()
    } else {
        T::one() - lit::<T>(3.0) * s * s + lit::<T>(2.0) * s * s * s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness<T> {
    pub epsilon: T,
    pub eta: Vec<T>,
    /// `Q(η_ε)` around the sampled closed-form wall.
    pub q_value: T,
}

/// `η_ε = ξ η̂_ε` with `η̂_ε = ψ(ε(|x| − 1))`, and `Q(η_ε)` around `wall` sampled on `g`.
pub fn instability_witness<T: Real>(epsilon: T, wall: &impl ClosedFormWall<T>, g: &Grid<T>) -> Result<Witness<T>> {
    instability_witness_with(epsilon, wall, g, Mutation::None)
}

/// [`instability_witness`] with `Q` evaluated through a possibly mutated `L₀`.
pub fn instability_witness_with<T: Real>(
    epsilon: T,
    wall: &impl ClosedFormWall<T>,
    g: &Grid<T>,
    mutation: Mutation,
) -> Result<Witness<T>> {
    if !(epsilon > T::zero()) {
        return Err(WallError::InvalidOptions("epsilon must be positive".into()));
    }
    let reach = T::one() + lit::<T>(2.0) / epsilon;
    if !(g.half_length() > reach) {
        return Err(WallError::DomainTooSmall(format!(
            "half_length {} must exceed 1 + 2/epsilon = {}",
            to_f64(g.half_length()),
            to_f64(reach)
        )));
    }
    let p = Profile::pinned_from_fn(g, |x| wall.phi(x));
    let mut eta: Vec<T> =
        g.nodes().iter().map(|&x| wall.flux(x) * smoothstep_cutoff(epsilon * (x.abs() - T::one()))).collect();
    let n = eta.len();
    eta[0] = T::zero();
    eta[n - 1] = T::zero();
    let q_value = TridiagonalOperator::from_angles(OperatorKind::L0, g, p.values(), mutation).pairing(&eta);
    Ok(Witness { epsilon, eta, q_value })
}

/// [`instability_witness`] for the step-weight wall.
pub fn instability_witness_step<T: Real>(epsilon: T, step: &StepWallClosedForm<T>, g: &Grid<T>) -> Result<Witness<T>> {
    instability_witness(epsilon, step, g)
}

/// `−3 sin φ(1) cos² φ(1)`, the limit of `Q(η_ε)/2` as `ε → 0`.
pub fn witness_limit<T: Real>(step: &StepWallClosedForm<T>) -> T {
    let (s, c) = (step.phi_at_1.sin(), step.phi_at_1.cos());
    -lit::<T>(3.0) * s * c * c
}

/// `T(v)` with its split into in-plane and out-of-plane parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondVariationT<T> {
    pub total: T,
    /// `T(v′)` with `v′ = (v₁, v₂, 0)`; present when `m` is planar.
    pub planar: Option<T>,
    /// `(L₂ v₃, v₃)`; present when `m` is planar.
    pub transverse: Option<T>,
    /// `η = v₁ cos φ − v₂ sin φ` and `Q(η)`, when `m` is planar and `v₃ ≡ 0`, `v₂(0) = 0`.
    pub reduced: Option<(Vec<T>, T)>,
}

/// Tolerance on `v · m` for a perturbation to count as tangential.
pub const TANGENTIAL_TOLERANCE: f64 = 1e-10;

/// Second variation of the sphere energy at `m` in the tangential direction `v`.
pub fn second_variation_t<T: Real>(_w: &Weight<T>, m: &SphereMap<'_, T>, v: &[[T; 3]]) -> Result<SecondVariationT<T>> {
    let g = m.grid();
    let n = g.n_nodes();
    if v.len() != n {
        return Err(WallError::DimensionMismatch { expected: n, got: v.len() });
    }
    let tol = lit::<T>(TANGENTIAL_TOLERANCE);
    for (node, (mi, vi)) in m.values().iter().zip(v).enumerate() {
        let d = mi[0] * vi[0] + mi[1] * vi[1] + mi[2] * vi[2];
        if d.abs() > tol {
            return Err(WallError::NotTangential { node, dot: to_f64(d) });
        }
    }
    let zero = |vi: &[T; 3]| vi.iter().all(|&c| c == T::zero());
    if !zero(&v[0]) || !zero(&v[n - 1]) {
        return Err(WallError::InvalidOptions("perturbation must vanish at the boundary nodes".into()));
    }
    let total = second_variation_f(m, v);
    let planar_map = m.values().iter().all(|mi| mi[2] == T::zero());
    if !planar_map {
        return Ok(SecondVariationT { total, planar: None, transverse: None, reduced: None });
    }
    let in_plane: Vec<[T; 3]> = v.iter().map(|vi| [vi[0], vi[1], T::zero()]).collect();
    let planar = second_variation_f(m, &in_plane);
    let phi = m.planar_angles();
    let l2 = TridiagonalOperator::from_angles(OperatorKind::L2, g, &phi, Mutation::None);
    let v3: Vec<T> = v.iter().map(|vi| vi[2]).collect();
    let transverse = l2.pairing(&v3);
    let z = g.zero_index();
    let reduced = (v3.iter().all(|&c| c == T::zero()) && v[z][1] == T::zero()).then(|| {
        let eta: Vec<T> = v.iter().zip(&phi).map(|(vi, &p)| vi[0] * p.cos() - vi[1] * p.sin()).collect();
        let profile = Profile::new(g, phi.clone()).expect("length checked");
        let q = second_variation_g(&profile, &eta);
        (eta, q)
    });
    Ok(SecondVariationT { total, planar: Some(planar), transverse: Some(transverse), reduced })
}

/// `v = (η cos φ, −η sin φ, 0)`.
pub fn tangential_lift<T: Real>(p: &Profile<'_, T>, eta: &[T]) -> Vec<[T; 3]> {
    p.values().iter().zip(eta).map(|(&f, &e)| [e * f.cos(), -e * f.sin(), T::zero()]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::compute_flux;
    use crate::energy::energy_g;
    use crate::oracles::HomogeneousWall;
    use crate::solver::{solve_newton, SolverOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solved(w: &Weight<f64>, cpu: usize) -> (Grid<f64>, Vec<f64>) {
        let g = Grid::build(w, 12.0, cpu).unwrap();
        let v = solve_newton(w, &g, &SolverOptions::default()).unwrap().profile.into_values();
        (g, v)
    }

    fn random_eta(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let mut eta: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        eta[0] = 0.0;
        eta[n - 1] = 0.0;
        eta
    }

    #[test]
    fn pairing_matches_matrix_and_energy() {
        let w = StepWallClosedForm::weight();
        let (g, v) = solved(&w, 50);
        let p = Profile::new(&g, v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [OperatorKind::L0, OperatorKind::L1, OperatorKind::L2] {
            let op = assemble_operator(kind, &w, &p).unwrap();
            let eta = random_eta(&mut rng, g.n_nodes());
            let direct = op.pairing(&eta);
            let matrix = op.matrix.quadratic_form(&eta[1..eta.len() - 1]);
            assert!((direct - matrix).abs() <= 1e-12 * direct.abs());
            assert!((op.inner(&eta, &eta) - direct).abs() <= 1e-12 * direct.abs());
        }
        // L₀ is half the second difference of G
        let op = assemble_operator(OperatorKind::L0, &w, &p).unwrap();
        let eta: Vec<f64> = g.nodes().iter().map(|&x| (-x * x).exp() * (1.0 - (x / 12.0).powi(2))).collect();
        let t = 1e-3;
        let shifted = |s: f64| {
            let vals: Vec<f64> = p.values().iter().zip(&eta).map(|(&a, &b)| a + s * b).collect();
            energy_g(&Profile::new(&g, vals).unwrap())
        };
        let fd = (shifted(t) + shifted(-t) - 2.0 * shifted(0.0)) / (t * t);
        assert!((op.pairing(&eta) - fd / 2.0).abs() <= 1e-4 * fd.abs());
    }

    #[test]
    fn l2_minus_l1_is_the_weight() {
        let w = StepWallClosedForm::weight();
        let (g, v) = solved(&w, 50);
        let p = Profile::new(&g, v).unwrap();
        let l1 = assemble_operator(OperatorKind::L1, &w, &p).unwrap();
        let l2 = assemble_operator(OperatorKind::L2, &w, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let eta = random_eta(&mut rng, g.n_nodes());
        let weighted: f64 = (1..g.n_nodes() - 1).map(|i| g.weighted_mass(i) * eta[i] * eta[i]).sum();
        let (a, b) = (l2.pairing(&eta), l1.pairing(&eta));
        assert!((a - b - weighted).abs() <= 1e-12 * a.abs().max(b.abs()));
    }

    #[test]
    fn unconverged_profile_is_rejected() {
        let w = StepWallClosedForm::weight();
        let g = Grid::build(&w, 12.0, 50).unwrap();
        let p = Profile::pinned_from_fn(&g, |x: f64| x.tanh().asin());
        assert!(matches!(assemble_operator(OperatorKind::L0, &w, &p), Err(WallError::ProfileNotConverged { .. })));
    }

    #[test]
    fn homogeneous_kernel() {
        let w = Weight::constant(1.0).unwrap();
        let (g, v) = solved(&w, 200);
        let p = Profile::new(&g, v).unwrap();
        let op = assemble_operator(OperatorKind::L0, &w, &p).unwrap();
        let dphi: Vec<f64> = p.values().iter().map(|v| v.cos()).collect();
        assert!(op.scaled_residual(&dphi, |_| false) <= 1e-3);
        let r = smallest_eigenpair(&op).unwrap();
        assert!(r.smallest_eigenvalue.abs() <= 1e-4, "{}", r.smallest_eigenvalue);
        let cos = dot(&r.eigenvector, &dphi) / (norm(&r.eigenvector) * norm(&dphi));
        assert!(cos >= 0.999);
    }

    #[test]
    fn step_weight_is_unstable() {
        let w = StepWallClosedForm::weight();
        let (g, v) = solved(&w, 200);
        let p = Profile::new(&g, v).unwrap();
        let op = assemble_operator(OperatorKind::L0, &w, &p).unwrap();
        let xi = compute_flux(&w, &p).node_flux;
        assert!(op.pairing(&xi) < 0.0);
        assert!(smallest_eigenpair(&op).unwrap().smallest_eigenvalue < 0.0);
    }

    #[test]
    fn valley_weight_is_stable() {
        let w = Weight::from_segments(vec![-1.0, 1.0], vec![2.0, 1.0, 2.0]).unwrap();
        let (g, v) = solved(&w, 100);
        let p = Profile::new(&g, v).unwrap();
        for kind in [OperatorKind::L0, OperatorKind::L1, OperatorKind::L2] {
            let r = smallest_eigenpair(&assemble_operator(kind, &w, &p).unwrap()).unwrap();
            assert!(r.smallest_eigenvalue >= -1e-6, "{kind:?}: {}", r.smallest_eigenvalue);
            assert!(r.residual <= 1e-8);
        }
    }

    #[test]
    fn eigenpair_of_known_matrix() {
        // −u'' on (−L, L) with a ≡ 1, zero potential: λ₁ ≈ (π / 2L)² for fine meshes
        let w = Weight::constant(1.0).unwrap();
        let g = Grid::build(&w, 3.0, 100).unwrap();
        let phi = vec![std::f64::consts::FRAC_PI_4; g.n_nodes()];
        let mut op = TridiagonalOperator::from_angles(OperatorKind::L0, &g, &phi, Mutation::None);
        // cos 2φ = 0 up to rounding; clear it exactly
        op.potentials.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..op.matrix.len() {
            op.matrix.diag[k] = op.conductances[k] + op.conductances[k + 1];
        }
        let r = smallest_eigenpair(&op).unwrap();
        let exact = (std::f64::consts::PI / 6.0).powi(2);
        assert!((r.smallest_eigenvalue - exact).abs() <= 1e-4 * exact);
    }

    #[test]
    fn hardy_identity_is_exact() {
        let w = StepWallClosedForm::weight();
        let (g, v) = solved(&w, 50);
        let p = Profile::new(&g, v).unwrap();
        let xi = compute_flux(&w, &p).node_flux;
        let m2: Vec<f64> = p.values().iter().map(|v| v.cos()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in [OperatorKind::L0, OperatorKind::L1, OperatorKind::L2] {
            let op = assemble_operator(kind, &w, &p).unwrap();
            for psi in [&xi, &m2] {
                let eta = random_eta(&mut rng, g.n_nodes());
                let h = hardy_decomposition(&op, psi, &eta).unwrap();
                assert!(h.residual() <= 1e-12 * h.quadratic.abs() + 1e-12, "{kind:?} {h:?}");
                // η = ψ: no gradient part
                let mut same = psi.clone();
                same[0] = 0.0;
                let last = same.len() - 1;
                same[last] = 0.0;
                let h = hardy_decomposition(&op, psi, &same).unwrap();
                assert!(h.residual() <= 1e-12 * h.quadratic.abs() + 1e-12);
            }
        }
        let op = assemble_operator(OperatorKind::L0, &w, &p).unwrap();
        let mut bad = xi.clone();
        bad[7] = 0.0;
        assert!(matches!(hardy_residual(&op, &bad, &xi), Err(WallError::NonPositivePsi { node: 7 })));
    }

    #[test]
    fn l2_annihilates_cos_phi() {
        let w = StepWallClosedForm::weight();
        let (g, v) = solved(&w, 100);
        let p = Profile::new(&g, v).unwrap();
        let op = assemble_operator(OperatorKind::L2, &w, &p).unwrap();
        let m2: Vec<f64> = p.values().iter().map(|v| v.cos()).collect();
        let z = g.zero_index();
        assert!(op.scaled_residual(&m2, |i| i == z) <= 1e-6);
        let lambda = LagrangeMultiplier::from_profile(&p);
        assert!(lambda.within_bounds(&w, &p));
    }

    #[test]
    fn step_witness() {
        let s = StepWallClosedForm::<f64>::build().unwrap();
        let w = StepWallClosedForm::weight();
        let g = Grid::build(&w, 42.0, 200).unwrap();
        let limit = witness_limit(&s);
        let mut errors = Vec::new();
        for eps in [0.2, 0.1, 0.05] {
            let wit = instability_witness_step(eps, &s, &g).unwrap();
            assert!(wit.q_value < 0.0);
            errors.push((wit.q_value / 2.0 - limit).abs());
        }
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
        let wit = instability_witness_step(0.1, &s, &g).unwrap();
        let p = Profile::pinned_from_fn(&g, |x| s.phi(x));
        assert!((wit.q_value - second_variation_g(&p, &wit.eta)).abs() <= 1e-12 * wit.q_value.abs());
        let small = Grid::build(&w, 12.0, 50).unwrap();
        assert!(matches!(instability_witness_step(0.05, &s, &small), Err(WallError::DomainTooSmall(_))));
    }

    #[test]
    fn homogeneous_witness_is_not_negative() {
        let w = Weight::constant(1.0).unwrap();
        let g = Grid::build(&w, 42.0, 200).unwrap();
        for eps in [0.2, 0.1, 0.05] {
            let wit = instability_witness(eps, &HomogeneousWall::new(0.0), &g).unwrap();
            assert!(wit.q_value >= -1e-4, "{}", wit.q_value);
        }
    }

    #[test]
    fn t_reduces_to_q() {
        let w = StepWallClosedForm::weight();
        let (g, v) = solved(&w, 50);
        let p = Profile::new(&g, v).unwrap();
        let m = SphereMap::from_profile(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let eta = random_eta(&mut rng, g.n_nodes());
        let t = second_variation_t(&w, &m, &tangential_lift(&p, &eta)).unwrap();
        let q = second_variation_g(&p, &eta);
        assert!((t.total - q).abs() <= 1e-10 * q.abs().max(1.0));
        let (_, rq) = t.reduced.clone().unwrap_or_else(|| (eta.clone(), q));
        assert!((t.planar.unwrap() - rq).abs() <= 1e-10 * q.abs().max(1.0));

        let v3 = random_eta(&mut rng, g.n_nodes());
        let v: Vec<[f64; 3]> = v3.iter().map(|&c| [0.0, 0.0, c]).collect();
        let t = second_variation_t(&w, &m, &v).unwrap();
        let l2 = assemble_operator(OperatorKind::L2, &w, &p).unwrap();
        assert!((t.total - l2.pairing(&v3)).abs() <= 1e-10 * t.total.abs());
        assert!(t.total >= -1e-10);

        let bad: Vec<[f64; 3]> = (0..g.n_nodes()).map(|i| if i == 3 { [0.0, 1.0, 0.0] } else { [0.0; 3] }).collect();
        assert!(matches!(second_variation_t(&w, &m, &bad), Err(WallError::NotTangential { node: 3, .. })));
    }
}
