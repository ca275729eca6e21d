//! Static domain walls in nanowires of variable cross section.
//!
//! A wall is a minimizer `φ: ℝ → [−π/2, π/2]` of
//! `G(φ) = ∫ a(x) ((∂ₓφ)² + cos²φ) dx` with `φ(±∞) = ±π/2` and the center pinned at `φ(0) = 0`.
//! The crate discretizes `G` on a truncated mesh, solves for the wall by two independent
//! routes, and checks its structure (flux, first integrals) and its stability through the
//! second-variation operators `L₀, L₁, L₂`.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64` and `*32`
//! aliases below fix the scalar.

pub mod acceptance;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod oracles;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod stability;
pub mod weight;

pub use diagnostics::{
    compute_flux, first_integral, flux_monotonicity, FirstIntegralReport, FluxField, FluxJump, IntervalIntegral,
    MonotonicityReport,
};
pub use energy::{
    energy_e_convex, energy_f, energy_g, gradient_e_convex, gradient_g, hessian_g, reduce_to_planar,
    second_variation_g, Profile, SphereMap,
};
pub use error::{Result, WallError};
pub use grid::Grid;
pub use oracles::{
    step_weight_d, translated_wall_energy, translated_wall_gap, ClosedFormWall, HomogeneousWall, StepWallClosedForm,
};
pub use scalar::Real;
pub use solver::{solve_convex, solve_newton, verify_solution, SolutionCheck, SolvePath, SolveResult, SolverOptions};
pub use stability::{
    assemble_operator, hardy_residual, instability_witness_step, second_variation_t, smallest_eigenpair,
    LagrangeMultiplier, OperatorKind, StabilityReport, TridiagonalOperator,
};
pub use weight::{Weight, WeightTraits};

pub type Weight64 = Weight<f64>;
pub type Grid64 = Grid<f64>;
pub type Profile64<'g> = Profile<'g, f64>;
pub type SphereMap64<'g> = SphereMap<'g, f64>;
pub type SolveResult64<'g> = SolveResult<'g, f64>;
pub type StepWall64 = StepWallClosedForm<f64>;

pub type Weight32 = Weight<f32>;
pub type Grid32 = Grid<f32>;
pub type Profile32<'g> = Profile<'g, f32>;
pub type SphereMap32<'g> = SphereMap<'g, f32>;
pub type SolveResult32<'g> = SolveResult<'g, f32>;
