//! Flux `ξ = a ∂ₓφ`, its monotonicity, and the first integrals of a solved wall.

use std::ops::Range;

use crate::energy::Profile;
use crate::scalar::{lit, max_abs, to_f64, Real};
use crate::weight::Weight;

/// Jump of the flux across one weight breakpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxJump {
    pub node: usize,
    pub x: f64,
    /// `|ξ_{c+1} − ξ_c|` between the two cells meeting at the node; `O(h)`.
    pub cell_jump: f64,
    /// Jump between the nodal limits reconstructed from either side; zero at a discrete solution.
    pub node_jump: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxField<'g, T> {
    pub profile: Profile<'g, T>,
    /// `ξ_c = a_c Δφ/Δx` per cell.
    pub cell_flux: Vec<T>,
    /// Nodal flux: mean of the one-sided limits (one side only at the ends).
    pub node_flux: Vec<T>,
    pub jumps: Vec<FluxJump>,
}

impl<T: Real> FluxField<'_, T> {
    /// `ξ(0⁺)`, the right limit at the center node.
    pub fn center_flux(&self) -> T {
        let z = self.profile.grid().zero_index();
        self.right_limit(z)
    }

    /// `ξ` at node `i` seen from the cell on its left: `ξ_L − (a_L h_L / 2) sin φᵢ cos φᵢ`.
    pub fn left_limit(&self, i: usize) -> T {
        let g = self.profile.grid();
        let s = sincos(self.profile.values()[i]);
        self.cell_flux[i - 1] - g.cell_weights()[i - 1] * g.cell_width(i - 1) * lit(0.5) * s
    }

    /// `ξ` at node `i` seen from the cell on its right: `ξ_R + (a_R h_R / 2) sin φᵢ cos φᵢ`.
    pub fn right_limit(&self, i: usize) -> T {
        let g = self.profile.grid();
        let s = sincos(self.profile.values()[i]);
        self.cell_flux[i] + g.cell_weights()[i] * g.cell_width(i) * lit(0.5) * s
    }

    pub fn max_cell_jump(&self) -> f64 {
        self.jumps.iter().fold(0.0, |m, j| m.max(j.cell_jump))
    }

    pub fn max_node_jump(&self) -> f64 {
        self.jumps.iter().fold(0.0, |m, j| m.max(j.node_jump))
    }
}

fn sincos<T: Real>(phi: T) -> T {
    phi.sin() * phi.cos()
}

/// Per-cell flux of `p`, with nodal limits and jumps at every breakpoint node.
///
/// The one-sided nodal limits integrate `∂ₓξ = −a sin φ cos φ` over the half cell next
/// to the node, so their difference is exactly half the discrete Euler–Lagrange residual.
pub fn compute_flux<'g, T: Real>(_w: &Weight<T>, p: &Profile<'g, T>) -> FluxField<'g, T> {
    let g = p.grid();
    let cell_flux: Vec<T> = p.slopes().iter().zip(g.cell_weights()).map(|(&s, &a)| a * s).collect();
    let mut field = FluxField { profile: p.clone(), cell_flux, node_flux: Vec::new(), jumps: Vec::new() };
    let n = g.n_nodes();
    let mut node_flux = Vec::with_capacity(n);
    for i in 0..n {
        let v = if i == 0 {
            field.right_limit(0)
        } else if i == n - 1 {
            field.left_limit(i)
        } else {
            (field.left_limit(i) + field.right_limit(i)) * lit(0.5)
        };
        node_flux.push(v);
    }
    field.node_flux = node_flux;
    field.jumps = g
        .breakpoint_nodes()
        .iter()
        .map(|&i| FluxJump {
            node: i,
            x: to_f64(g.nodes()[i]),
            cell_jump: to_f64((field.cell_flux[i] - field.cell_flux[i - 1]).abs()),
            node_jump: to_f64((field.right_limit(i) - field.left_limit(i)).abs()),
        })
        .collect();
    field
}

/// Slack allowed when checking monotonicity of the flux and the slope.
pub const MONOTONICITY_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// Largest increase `ξ_{c+1} − ξ_c` over cells in `(0, L)` (non-positive when monotone).
    pub max_flux_increase: f64,
    pub flux_nonincreasing: bool,
    /// Concavity on `(0, L)`: largest increase of `Δφ/Δx`; only checked when
    /// the weight is even and non-decreasing on `ℝ₊`.
    pub max_slope_increase: Option<f64>,
    pub slope_nonincreasing: Option<bool>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.flux_nonincreasing && self.slope_nonincreasing.unwrap_or(true)
    }
}

fn max_increase<T: Real>(v: &[T]) -> f64 {
    v.windows(2).map(|w| to_f64(w[1] - w[0])).fold(f64::NEG_INFINITY, f64::max)
}

pub fn flux_monotonicity<T: Real>(w: &Weight<T>, f: &FluxField<'_, T>) -> MonotonicityReport {
    let g = f.profile.grid();
    let z = g.zero_index();
    let max_flux_increase = max_increase(&f.cell_flux[z..]);
    let traits = w.classify();
    let max_slope_increase = (traits.is_even && traits.is_nondecreasing_on_positive)
        .then(|| max_increase(&f.profile.slopes()[z..]));
    MonotonicityReport {
        max_flux_increase,
        flux_nonincreasing: max_flux_increase <= MONOTONICITY_SLACK,
        max_slope_increase,
        slope_nonincreasing: max_slope_increase.map(|m| m <= MONOTONICITY_SLACK),
    }
}

/// First integral `(∂ₓφ)² − cos²φ` on one maximal interval of constant weight.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalIntegral<T> {
    pub cells: Range<usize>,
    pub x_start: T,
    pub x_end: T,
    pub weight: T,
    /// Values at cell midpoints.
    pub values: Vec<T>,
    /// Length-weighted mean over the interval.
    pub mean: T,
    pub max_deviation: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstIntegralReport<T> {
    pub per_interval: Vec<IntervalIntegral<T>>,
}

impl<T: Real> FirstIntegralReport<T> {
    /// The interval covering `(lo, hi)`, matched by its endpoints.
    pub fn interval(&self, lo: T, hi: T) -> Option<&IntervalIntegral<T>> {
        let tol = lit::<T>(1e-12);
        self.per_interval.iter().find(|iv| (iv.x_start - lo).abs() <= tol && (iv.x_end - hi).abs() <= tol)
    }

    /// Largest deviation from the interval mean over all intervals.
    pub fn max_deviation(&self) -> T {
        max_abs(self.per_interval.iter().map(|iv| iv.max_deviation))
    }
}

/// `(Δφ/Δx)² − cos²φ_mid` per cell, with `φ_mid` the cell average.
pub fn cell_first_integral<T: Real>(p: &Profile<'_, T>) -> Vec<T> {
    let phi = p.values();
    p.slopes()
        .iter()
        .enumerate()
        .map(|(c, &s)| {
            let m = ((phi[c] + phi[c + 1]) * lit(0.5)).cos();
            s * s - m * m
        })
        .collect()
}

/// Cell first integral averaged onto nodes (one-sided at the ends).
pub fn node_first_integral<T: Real>(p: &Profile<'_, T>) -> Vec<T> {
    let cells = cell_first_integral(p);
    let n = p.values().len();
    (0..n)
        .map(|i| {
            if i == 0 {
                cells[0]
            } else if i == n - 1 {
                cells[n - 2]
            } else {
                (cells[i - 1] + cells[i]) * lit(0.5)
            }
        })
        .collect()
}

/// First integrals on each maximal constant-weight interval (split at the origin).
pub fn first_integral<T: Real>(_w: &Weight<T>, p: &Profile<'_, T>) -> FirstIntegralReport<T> {
    let g = p.grid();
    let cells = cell_first_integral(p);
    let per_interval = g
        .constant_weight_intervals()
        .into_iter()
        .map(|range| {
            let values: Vec<T> = cells[range.clone()].to_vec();
            let mut total = T::zero();
            let mut length = T::zero();
            for c in range.clone() {
                total = total + cells[c] * g.cell_width(c);
                length = length + g.cell_width(c);
            }
            let mean = total / length;
            let max_deviation = max_abs(values.iter().map(|&v| v - mean));
            IntervalIntegral {
                x_start: g.nodes()[range.start],
                x_end: g.nodes()[range.end],
                weight: g.cell_weights()[range.start],
                cells: range,
                values,
                mean,
                max_deviation,
            }
        })
        .collect();
    FirstIntegralReport { per_interval }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::oracles::{step_weight_d, ClosedFormWall, StepWallClosedForm};
    use crate::solver::{solve_newton, SolverOptions};

    fn solved(w: &Weight<f64>, cpu: usize) -> (Grid<f64>, Vec<f64>) {
        let g = Grid::build(w, 12.0, cpu).unwrap();
        let v = solve_newton(w, &g, &SolverOptions::default()).unwrap().profile.into_values();
        (g, v)
    }

    #[test]
    fn step_flux_is_continuous_and_centered() {
        let w = StepWallClosedForm::weight();
        let (g, v) = solved(&w, 200);
        let p = Profile::new(&g, v).unwrap();
        let f = compute_flux(&w, &p);
        assert_eq!(f.jumps.len(), 2);
        assert!(f.max_node_jump() <= 1e-3);
        let d: f64 = step_weight_d().unwrap();
        assert!((f.center_flux() - 2.0 * d).abs() <= 1e-3);
        assert!(f.cell_flux.iter().all(|&x| x > 0.0));
        let m = flux_monotonicity(&w, &f);
        assert!(m.flux_nonincreasing && m.slope_nonincreasing.is_none());
    }

    #[test]
    fn cell_jump_is_first_order() {
        let w = StepWallClosedForm::weight();
        let jumps: Vec<f64> = [50, 100, 200]
            .iter()
            .map(|&n| {
                let (g, v) = solved(&w, n);
                compute_flux(&w, &Profile::new(&g, v).unwrap()).max_cell_jump()
            })
            .collect();
        for pair in jumps.windows(2) {
            assert!((pair[0] / pair[1]).log2() >= 0.9, "{jumps:?}");
        }
    }

    #[test]
    fn homogeneous_flux_is_cos() {
        let w = Weight::constant(1.0).unwrap();
        let (g, v) = solved(&w, 200);
        let p = Profile::new(&g, v).unwrap();
        let f = compute_flux(&w, &p);
        for (c, &x) in f.cell_flux.iter().enumerate() {
            let mid = (p.values()[c] + p.values()[c + 1]) / 2.0;
            assert!((x - mid.cos()).abs() <= 1e-3);
        }
        let m = flux_monotonicity(&w, &f);
        assert!(m.passed());
        let fi = first_integral(&w, &p);
        assert_eq!(fi.per_interval.len(), 2);
        assert!(fi.per_interval.iter().all(|iv| iv.mean.abs() <= 1e-3));
    }

    #[test]
    fn valley_weight_is_concave_on_the_right() {
        let w = Weight::from_segments(vec![-1.0, 1.0], vec![2.0, 1.0, 2.0]).unwrap();
        let (g, v) = solved(&w, 200);
        let p = Profile::new(&g, v).unwrap();
        let m = flux_monotonicity(&w, &compute_flux(&w, &p));
        assert_eq!(m.slope_nonincreasing, Some(true));
        assert!(m.passed());
    }

    #[test]
    fn step_first_integrals() {
        let w = StepWallClosedForm::weight();
        let (g, v) = solved(&w, 200);
        let p = Profile::new(&g, v).unwrap();
        let fi = first_integral(&w, &p);
        let d: f64 = step_weight_d().unwrap();
        assert!((fi.interval(0.0, 1.0).unwrap().mean - (d * d - 1.0)).abs() <= 1e-3);
        assert!(fi.interval(1.0, 12.0).unwrap().mean.abs() <= 1e-3);
        assert!(d * d - 1.0 < 0.0);
    }

    #[test]
    fn closed_form_step_wall_first_integrals() {
        let s = StepWallClosedForm::<f64>::build().unwrap();
        let w = StepWallClosedForm::weight();
        let g = Grid::build(&w, 12.0, 400).unwrap();
        let p = Profile::pinned_from_fn(&g, |x| s.phi(x));
        let fi = first_integral(&w, &p);
        assert!((fi.interval(0.0, 1.0).unwrap().mean - (s.d * s.d - 1.0)).abs() <= 1e-5);
        assert!(fi.interval(1.0, 12.0).unwrap().mean.abs() <= 1e-5);
    }
}
