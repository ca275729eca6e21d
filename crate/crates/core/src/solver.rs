//! Two independent routes to the discrete wall: damped Newton on the
//! Euler–Lagrange system of `G`, and projected Newton on the convex functional `E(m₂)`.

use crate::diagnostics::compute_flux;
use crate::energy::{
    energy_e_convex, energy_g, gradient_e_convex, gradient_g, hessian_e_convex, hessian_g, Profile,
};
use crate::error::{Result, WallError};
use crate::grid::Grid;
use crate::linalg::{dot, SymTridiagonal};
use crate::oracles::gudermannian;
use crate::scalar::{lit, max_abs, to_f64, Real};
use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Max-norm of the free gradient of `G` at which a solve is accepted.
    pub residual_tolerance: f64,
    /// Backtracking factor of the line search.
    pub damping: f64,
    /// Project iterates into `[-π/2, π/2]` (and the sign class) during the line search.
    pub clamp: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 200, residual_tolerance: 1e-10, damping: 0.5, clamp: true }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(WallError::InvalidOptions("max_iterations must be positive".into()));
        }
        if !(self.residual_tolerance > 0.0) || !self.residual_tolerance.is_finite() {
            return Err(WallError::InvalidOptions("residual_tolerance must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(WallError::InvalidOptions("damping must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolvePath {
    Newton,
    Convex,
    Oracle,
}

impl SolvePath {
    pub fn as_str(self) -> &'static str {
        match self {
            SolvePath::Newton => "newton",
            SolvePath::Convex => "convex",
            SolvePath::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<'g, T> {
    pub profile: Profile<'g, T>,
    pub iterations: usize,
    pub final_residual: f64,
    pub path: SolvePath,
    /// Objective value after every accepted step, starting with the initial iterate
    /// (`G` on the Newton path, `E` on the convex path).
    pub energy_history: Vec<T>,
}

/// Steps taken after the tolerance is met, kept only while they reduce the residual.
const POLISH_STEPS: usize = 3;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Replaces the center row and column by the identity so the pinned node stays fixed.
fn pin_row<T: Real>(h: &mut SymTridiagonal<T>, row: usize) {
    h.diag[row] = T::one();
    if row > 0 {
        h.off[row - 1] = T::zero();
    }
    if row < h.off.len() {
        h.off[row] = T::zero();
    }
}

/// Solves `H δ = rhs`, shifting `H` by a growing multiple of the identity when it is not positive definite.
fn newton_direction<T: Real>(h: &SymTridiagonal<T>, rhs: &[T]) -> Vec<T> {
    if let Some(x) = h.solve_spd(rhs) {
        return x;
    }
    let scale = max_abs(h.diag.iter().copied()).max(T::one());
    let mut shift = scale * lit(1e-12);
    loop {
        let mut shifted = h.clone();
        for d in shifted.diag.iter_mut() {
            *d = *d + shift;
        }
        if let Some(x) = shifted.solve_spd(rhs) {
            return x;
        }
        shift = shift * lit(10.0);
    }
}

/// Nodal box of the sign class: `[-π/2, 0]` left of the origin, `[0, π/2]` right of it.
fn project_sign_class<T: Real>(g: &Grid<T>, phi: &mut [T]) {
    let z = g.zero_index();
    let half_pi = T::FRAC_PI_2();
    for (i, v) in phi.iter_mut().enumerate() {
        *v = if i < z {
            v.max(-half_pi).min(T::zero())
        } else if i > z {
            v.max(T::zero()).min(half_pi)
        } else {
            T::zero()
        };
    }
}

/// Interior-node view of a nodal vector (row `k` is node `k + 1`).
fn interior<T: Real>(v: &[T]) -> Vec<T> {
    v[1..v.len() - 1].to_vec()
}

/// Residual of the Newton path: `max |∂G/∂φᵢ|` over free nodes.
pub fn residual_g<T: Real>(p: &Profile<'_, T>) -> f64 {
    to_f64(max_abs(gradient_g(p)))
}

/// Residual of the convex path expressed in `φ` units: `max |∂E/∂m₂ᵢ| sin φᵢ`,
/// which equals [`residual_g`] of the reconstructed profile.
pub fn residual_e<T: Real>(g: &Grid<T>, m2: &[T]) -> f64 {
    let grad = gradient_e_convex(g, m2);
    let z = g.zero_index();
    to_f64(max_abs(grad.iter().zip(m2).enumerate().map(|(i, (&d, &m))| {
        if i == z {
            T::zero()
        } else {
            d * (T::one() - m * m).max(T::zero()).sqrt()
        }
    })))
}

/// One damped step: returns the accepted iterate and its objective, or `None`
/// if no backtracked step satisfied the acceptance rule.
#[allow(clippy::too_many_arguments)]
fn line_search<T: Real>(
    x: &[T],
    f0: T,
    slope: T,
    dir: &[T],
    damping: T,
    project: &impl Fn(&mut [T]),
    objective: &impl Fn(&[T]) -> T,
    residual: &impl Fn(&[T]) -> f64,
    r0: f64,
) -> Option<(Vec<T>, T)> {
    let mut t = T::one();
    let noise = lit::<T>(64.0) * T::epsilon() * f0.abs().max(T::one());
    for _ in 0..MAX_BACKTRACKS {
        let mut trial: Vec<T> = x.iter().zip(dir).map(|(&a, &d)| a + t * d).collect();
        project(&mut trial);
        let f = objective(&trial);
        if f <= f0 + lit::<T>(ARMIJO) * t * slope {
            return Some((trial, f));
        }
        // At rounding level the Armijo test is decided by noise; accept steps that
        // do not raise the objective beyond it and reduce the residual.
        if f <= f0 + noise && residual(&trial) < r0 {
            return Some((trial, f));
        }
        t = t * damping;
    }
    None
}

/// Damped Newton on the discrete Euler–Lagrange system of `G`, started from the
/// homogeneous wall `gd(x)`.
pub fn solve_newton<'g, T: Real>(
    w: &Weight<T>,
    g: &'g Grid<T>,
    opts: &SolverOptions,
) -> Result<SolveResult<'g, T>> {
    opts.validate()?;
    check_grid(w, g)?;
    let start = Profile::pinned_from_fn(g, gudermannian);
    newton_from(start, opts)
}

/// Damped Newton from an arbitrary starting profile (constraints are imposed first).
pub fn newton_from<'g, T: Real>(mut start: Profile<'g, T>, opts: &SolverOptions) -> Result<SolveResult<'g, T>> {
    opts.validate()?;
    let g = start.grid();
    start.impose_constraints();
    if opts.clamp {
        project_sign_class(g, start.values_mut());
    }
    let z = g.zero_index();
    let damping = lit::<T>(opts.damping);
    let clamp = opts.clamp;
    let project = move |v: &mut [T]| {
        if clamp {
            project_sign_class(g, v);
        }
        v[z] = T::zero();
    };
    let profile_of = |v: &[T]| Profile::new(g, v.to_vec()).expect("length preserved");
    let objective = |v: &[T]| energy_g(&profile_of(v));
    let residual = |v: &[T]| residual_g(&profile_of(v));

    let mut phi = start.into_values();
    let mut energy = objective(&phi);
    let mut history = vec![energy];
    let mut r = residual(&phi);
    let mut iterations = 0;
    let mut polish = 0;
    while iterations < opts.max_iterations {
        if r <= opts.residual_tolerance {
            if polish == POLISH_STEPS {
                break;
            }
            polish += 1;
        }
        let p = profile_of(&phi);
        let grad = gradient_g(&p);
        let mut h = hessian_g(&p);
        pin_row(&mut h, z - 1);
        let rhs: Vec<T> = interior(&grad).into_iter().map(|v| -v).collect();
        let step = newton_direction(&h, &rhs);
        let mut dir = vec![T::zero(); phi.len()];
        dir[1..phi.len() - 1].copy_from_slice(&step);
        let slope = dot(&grad, &dir);
        iterations += 1;
        match line_search(&phi, energy, slope, &dir, damping, &project, &objective, &residual, r) {
            Some((next, e)) => {
                let rn = residual(&next);
                if r <= opts.residual_tolerance && rn >= r {
                    break;
                }
                phi = next;
                energy = e;
                r = rn;
                history.push(energy);
            }
            None => break,
        }
    }
    if !(r <= opts.residual_tolerance) {
        return Err(WallError::NoConvergence { iterations, residual: r });
    }
    let profile = profile_of(&phi);
    if let Some(node) = profile.first_decrease() {
        return Err(WallError::MonotonicityViolation { node });
    }
    Ok(SolveResult { profile, iterations, final_residual: r, path: SolvePath::Newton, energy_history: history })
}

fn check_grid<T: Real>(w: &Weight<T>, g: &Grid<T>) -> Result<()> {
    let expected: Vec<T> = (0..g.n_cells()).map(|c| w.eval(g.cell_midpoint(c))).collect();
    if expected.as_slice() != g.cell_weights() {
        return Err(WallError::InvalidGrid("grid was not built from this weight".into()));
    }
    Ok(())
}

/// Projected Newton on `E(m₂)` over `0 ≤ m₂ ≤ 1`, with `m₂(±L) = 0` and `m₂(0) = 1`.
/// The wall is reconstructed as `φᵢ = sign(xᵢ) arccos m₂ᵢ`.
pub fn solve_convex<'g, T: Real>(
    w: &Weight<T>,
    g: &'g Grid<T>,
    opts: &SolverOptions,
) -> Result<SolveResult<'g, T>> {
    opts.validate()?;
    check_grid(w, g)?;
    let n = g.n_nodes();
    let z = g.zero_index();
    let damping = lit::<T>(opts.damping);
    let project = move |v: &mut [T]| {
        for m in v.iter_mut() {
            *m = m.max(T::zero()).min(T::one());
        }
        v[0] = T::zero();
        v[n - 1] = T::zero();
        v[z] = T::one();
    };
    let objective = |v: &[T]| energy_e_convex(g, v);
    let residual = |v: &[T]| residual_e(g, v);

    let mut m2: Vec<T> = g.nodes().iter().map(|&x| T::one() / x.cosh()).collect();
    project(&mut m2);
    let mut energy = objective(&m2);
    let mut history = vec![energy];
    let mut r = residual(&m2);
    let mut iterations = 0;
    let mut polish = 0;
    while iterations < opts.max_iterations {
        if r <= opts.residual_tolerance {
            if polish == POLISH_STEPS {
                break;
            }
            polish += 1;
        }
        let grad = gradient_e_convex(g, &m2);
        let mut h = hessian_e_convex(g, &m2);
        let mut rhs: Vec<T> = interior(&grad).into_iter().map(|v| -v).collect();
        pin_row(&mut h, z - 1);
        rhs[z - 1] = T::zero();
        // nodes held at a bound by the gradient stay there
        for k in 0..rhs.len() {
            let m = m2[k + 1];
            let held = (m <= T::zero() && grad[k + 1] > T::zero()) || (m >= T::one() && grad[k + 1] < T::zero());
            if held {
                pin_row(&mut h, k);
                rhs[k] = T::zero();
            }
        }
        let step = newton_direction(&h, &rhs);
        let mut dir = vec![T::zero(); n];
        dir[1..n - 1].copy_from_slice(&step);
        let slope = dot(&grad, &dir);
        iterations += 1;
        match line_search(&m2, energy, slope, &dir, damping, &project, &objective, &residual, r) {
            Some((next, e)) => {
                let rn = residual(&next);
                if r <= opts.residual_tolerance && rn >= r {
                    break;
                }
                m2 = next;
                energy = e;
                r = rn;
                history.push(energy);
            }
            None => break,
        }
    }
    if !(r <= opts.residual_tolerance) {
        return Err(WallError::NoConvergence { iterations, residual: r });
    }
    let phi: Vec<T> = m2
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let a = m.max(T::zero()).min(T::one()).acos();
            if i < z {
                -a
            } else if i > z {
                a
            } else {
                T::zero()
            }
        })
        .collect();
    let mut profile = Profile::new(g, phi)?;
    profile.impose_constraints();
    if let Some(node) = profile.first_decrease() {
        return Err(WallError::MonotonicityViolation { node });
    }
    Ok(SolveResult { profile, iterations, final_residual: r, path: SolvePath::Convex, energy_history: history })
}

/// Residual above which [`verify_solution`] flags a profile as not solving the Euler–Lagrange system.
pub const VERIFY_RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionCheck {
    pub monotone: bool,
    pub in_range: bool,
    pub flux_positive: bool,
    pub el_residual: f64,
    pub el_residual_ok: bool,
    /// `max |φ(x) + φ(−x)|`, for even weights only.
    pub oddness_defect: Option<f64>,
}

impl SolutionCheck {
    pub fn passed(&self) -> bool {
        self.monotone && self.in_range && self.flux_positive && self.el_residual_ok
    }
}

/// Structural checks on a solved wall. Never fails; problems show up as flags.
pub fn verify_solution<T: Real>(w: &Weight<T>, r: &SolveResult<'_, T>) -> SolutionCheck {
    let p = &r.profile;
    let g = p.grid();
    let half_pi = T::FRAC_PI_2();
    let el_residual = residual_g(p);
    let flux = compute_flux(w, p);
    let oddness_defect = (w.classify().is_even && g.is_symmetric()).then(|| oddness_defect(p));
    SolutionCheck {
        monotone: p.first_decrease().is_none(),
        in_range: p.values().iter().all(|v| v.abs() <= half_pi),
        flux_positive: flux.cell_flux.iter().all(|&f| f > T::zero()),
        el_residual,
        el_residual_ok: el_residual <= VERIFY_RESIDUAL_TOLERANCE,
        oddness_defect,
    }
}

/// `max_i |φᵢ + φ_{mirror(i)}|` on a symmetric grid.
pub fn oddness_defect<T: Real>(p: &Profile<'_, T>) -> f64 {
    let v = p.values();
    let n = v.len();
    to_f64(max_abs((0..n).map(|i| v[i] + v[n - 1 - i])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::full_gradient_g;
    use crate::oracles::{step_weight_d, ClosedFormWall, HomogeneousWall, StepWallClosedForm};

    fn homogeneous() -> Weight<f64> {
        Weight::constant(1.0).unwrap()
    }

    fn step() -> Weight<f64> {
        StepWallClosedForm::weight()
    }

    fn valley() -> Weight<f64> {
        Weight::from_segments(vec![-1.0, 1.0], vec![2.0, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn options_validation() {
        assert!(SolverOptions::default().validate().is_ok());
        assert!(SolverOptions { damping: 1.0, ..Default::default() }.validate().is_err());
        assert!(SolverOptions { residual_tolerance: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverOptions { max_iterations: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn homogeneous_newton_matches_closed_form() {
        let w = homogeneous();
        let g = Grid::build(&w, 12.0, 200).unwrap();
        let r = solve_newton(&w, &g, &SolverOptions::default()).unwrap();
        let exact = HomogeneousWall::new(0.0);
        let dist = r.profile.sup_distance(&g.nodes().iter().map(|&x| exact.phi(x)).collect::<Vec<_>>());
        assert!(dist <= 1e-3, "{dist}");
        assert!((energy_g(&r.profile) - 4.0).abs() <= 1e-3);
        assert!(r.final_residual <= 1e-10);
        assert!(r.profile.satisfies_constraints());
    }

    #[test]
    fn step_newton_center_slope() {
        let w = step();
        let g = Grid::build(&w, 12.0, 200).unwrap();
        let r = solve_newton(&w, &g, &SolverOptions::default()).unwrap();
        let z = g.zero_index();
        let slope = r.profile.slopes()[z];
        let d: f64 = step_weight_d().unwrap();
        assert!((slope - d).abs() <= 1e-3, "{slope} vs {d}");
    }

    #[test]
    fn even_weight_solution_is_odd() {
        let w = valley();
        let g = Grid::build(&w, 12.0, 200).unwrap();
        let r = solve_newton(&w, &g, &SolverOptions::default()).unwrap();
        assert!(oddness_defect(&r.profile) <= 1e-10);
    }

    #[test]
    fn energy_never_increases_along_newton() {
        let w = step();
        let g = Grid::build(&w, 12.0, 100).unwrap();
        let r = solve_newton(&w, &g, &SolverOptions::default()).unwrap();
        let noise = 64.0 * f64::EPSILON * r.energy_history[0];
        for pair in r.energy_history.windows(2) {
            assert!(pair[1] <= pair[0] + noise, "{pair:?}");
        }
    }

    #[test]
    fn convex_path_agrees_with_newton() {
        for w in [homogeneous(), step(), valley()] {
            let g = Grid::build(&w, 12.0, 200).unwrap();
            let a = solve_newton(&w, &g, &SolverOptions::default()).unwrap();
            let b = solve_convex(&w, &g, &SolverOptions::default()).unwrap();
            assert_eq!(b.path, SolvePath::Convex);
            assert_eq!(b.profile.values()[g.zero_index()], 0.0);
            let dist = a.profile.sup_distance(b.profile.values());
            assert!(dist <= 1e-6, "{dist}");
        }
    }

    #[test]
    fn convex_residual_is_the_phi_gradient() {
        let w = step();
        let g = Grid::build(&w, 6.0, 40).unwrap();
        let p = Profile::pinned_from_fn(&g, |x: f64| gudermannian(0.8 * x));
        let m2: Vec<f64> = p.values().iter().map(|v| v.cos()).collect();
        let gp = full_gradient_g(&p);
        let ge = gradient_e_convex(&g, &m2);
        for i in g.interior() {
            if i != g.zero_index() {
                assert!((gp[i] + ge[i] * p.values()[i].sin()).abs() < 1e-9, "node {i}");
            }
        }
    }

    #[test]
    fn newton_reports_non_convergence() {
        let w = step();
        let g = Grid::build(&w, 12.0, 100).unwrap();
        let opts = SolverOptions { max_iterations: 1, ..Default::default() };
        assert!(matches!(solve_newton(&w, &g, &opts), Err(WallError::NoConvergence { .. })));
    }

    #[test]
    fn verification_flags() {
        let w = step();
        let g = Grid::build(&w, 12.0, 200).unwrap();
        let r = solve_newton(&w, &g, &SolverOptions::default()).unwrap();
        let check = verify_solution(&w, &r);
        assert!(check.passed(), "{check:?}");
        assert!(check.oddness_defect.unwrap() <= 1e-10);

        let mut bad = r.clone();
        let k = g.zero_index() + 300;
        bad.profile.values_mut()[k] += 0.1;
        let check = verify_solution(&w, &bad);
        assert!(!check.el_residual_ok);
        assert!(!check.passed());
    }

    #[test]
    fn foreign_grid_is_rejected() {
        let g = Grid::build(&step(), 12.0, 50).unwrap();
        assert!(matches!(solve_newton(&homogeneous(), &g, &SolverOptions::default()), Err(WallError::InvalidGrid(_))));
    }
}
