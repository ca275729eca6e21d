//! Truncated symmetric mesh on `[-L, L]`.
//!
//! The origin and every weight breakpoint are nodes, so the weight is exactly
//! constant on each cell. Each half-line is meshed independently from `0`
//! outward and the negative half is the reflection of its own construction;
//! an even weight therefore yields a grid that is mirror symmetric bit for bit.

use crate::error::{Result, WallError};
use crate::scalar::{lit, to_f64, Real};
use crate::weight::Weight;

pub const DEFAULT_HALF_LENGTH: f64 = 12.0;
pub const DEFAULT_CELLS_PER_UNIT: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    half_length: T,
    cells_per_unit: usize,
    nodes: Vec<T>,
    zero_index: usize,
    cell_weights: Vec<T>,
    breakpoint_nodes: Vec<usize>,
}

/// Nodes of `[0, L]` with the given interior special points, starting at 0.
fn half_line<T: Real>(specials: &[T], half_length: T, cells_per_unit: usize) -> Vec<T> {
    let density = lit::<T>(cells_per_unit as f64);
    let slack = lit::<T>(1e-9);
    let mut stops: Vec<T> = specials.to_vec();
    stops.push(half_length);
    let mut nodes = vec![T::zero()];
    let mut start = T::zero();
    for &stop in &stops {
        let length = stop - start;
        let cells = ((length * density - slack).ceil()).to_usize().unwrap_or(1).max(1);
        let count = lit::<T>(cells as f64);
        for k in 1..cells {
            nodes.push(start + length * lit::<T>(k as f64) / count);
        }
        nodes.push(stop);
        start = stop;
    }
    nodes
}

impl<T: Real> Grid<T> {
    /// Meshes `[-half_length, half_length]` with spacing at most `1/cells_per_unit`.
    pub fn build(weight: &Weight<T>, half_length: T, cells_per_unit: usize) -> Result<Self> {
        if cells_per_unit < 4 {
            return Err(WallError::InvalidGrid(format!("cells_per_unit = {cells_per_unit} < 4")));
        }
        if !(half_length > T::zero()) || !half_length.is_finite() {
            return Err(WallError::InvalidGrid(format!("half_length = {}", to_f64(half_length))));
        }
        let reach = weight.breakpoints().iter().fold(T::zero(), |m, b| m.max(b.abs()));
        if !(half_length > reach + T::one()) {
            return Err(WallError::DomainTooSmall(format!(
                "half_length {} must exceed max |breakpoint| + 1 = {}",
                to_f64(half_length),
                to_f64(reach + T::one())
            )));
        }

        let mut right: Vec<T> = weight.breakpoints().iter().copied().filter(|&b| b > T::zero()).collect();
        right.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let mut left: Vec<T> =
            weight.breakpoints().iter().copied().filter(|&b| b < T::zero()).map(|b| -b).collect();
        left.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

        let right_nodes = half_line(&right, half_length, cells_per_unit);
        let left_nodes = half_line(&left, half_length, cells_per_unit);

        let mut nodes: Vec<T> = left_nodes.iter().skip(1).rev().map(|&x| -x).collect();
        let zero_index = nodes.len();
        nodes.extend_from_slice(&right_nodes);

        let half = lit::<T>(0.5);
        let cell_weights = nodes.windows(2).map(|w| weight.eval((w[0] + w[1]) * half)).collect();
        let breakpoint_nodes = weight
            .breakpoints()
            .iter()
            .filter_map(|&b| nodes.iter().position(|&x| x == b))
            .collect();

        Ok(Self { half_length, cells_per_unit, nodes, zero_index, cell_weights, breakpoint_nodes })
    }

    pub fn half_length(&self) -> T {
        self.half_length
    }

    pub fn cells_per_unit(&self) -> usize {
        self.cells_per_unit
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Index of the node at `x = 0`.
    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn cell_weights(&self) -> &[T] {
        &self.cell_weights
    }

    /// Node indices sitting on weight breakpoints.
    pub fn breakpoint_nodes(&self) -> &[usize] {
        &self.breakpoint_nodes
    }

    pub fn cell_width(&self, cell: usize) -> T {
        self.nodes[cell + 1] - self.nodes[cell]
    }

    pub fn cell_midpoint(&self, cell: usize) -> T {
        (self.nodes[cell] + self.nodes[cell + 1]) * lit(0.5)
    }

    /// Cell conductance `a_c / h_c`.
    pub fn conductance(&self, cell: usize) -> T {
        self.cell_weights[cell] / self.cell_width(cell)
    }

    /// Lumped (trapezoid) quadrature weight of a node.
    pub fn node_mass(&self, node: usize) -> T {
        let half = lit::<T>(0.5);
        let mut m = T::zero();
        if node > 0 {
            m = m + self.cell_width(node - 1) * half;
        }
        if node + 1 < self.nodes.len() {
            m = m + self.cell_width(node) * half;
        }
        m
    }

    /// Lumped quadrature weight of a node with the weight folded in: `Σ a_c h_c / 2`.
    pub fn weighted_mass(&self, node: usize) -> T {
        let half = lit::<T>(0.5);
        let mut m = T::zero();
        if node > 0 {
            m = m + self.cell_weights[node - 1] * self.cell_width(node - 1) * half;
        }
        if node + 1 < self.nodes.len() {
            m = m + self.cell_weights[node] * self.cell_width(node) * half;
        }
        m
    }

    /// Interior node indices (Dirichlet ends excluded).
    pub fn interior(&self) -> std::ops::Range<usize> {
        1..self.nodes.len() - 1
    }

    /// Index of the node mirrored through the origin, when the grid is symmetric there.
    pub fn mirror_node(&self, node: usize) -> Option<usize> {
        let j = (2 * self.zero_index).checked_sub(node)?;
        (j < self.nodes.len() && self.nodes[j] == -self.nodes[node]).then_some(j)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.nodes.len();
        (0..n).all(|i| self.nodes[i] == -self.nodes[n - 1 - i])
    }

    /// Maximal runs of cells with constant weight, additionally split at the origin.
    /// Returned as half-open cell ranges.
    pub fn constant_weight_intervals(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for c in 1..self.n_cells() {
            if self.cell_weights[c] != self.cell_weights[c - 1] || c == self.zero_index {
                out.push(start..c);
                start = c;
            }
        }
        out.push(start..self.n_cells());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> Weight<f64> {
        Weight::from_segments(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap()
    }

    #[test]
    fn step_grid_contract() {
        let g = Grid::build(&step(), 12.0, 200).unwrap();
        assert_eq!(g.n_cells(), 4800);
        for x in [-1.0, 0.0, 1.0] {
            assert!(g.nodes().contains(&x));
        }
        assert_eq!(g.nodes()[g.zero_index()], 0.0);
        assert_eq!(g.nodes()[0], -12.0);
        assert_eq!(*g.nodes().last().unwrap(), 12.0);
        assert!(g.is_symmetric());
        assert_eq!(g.breakpoint_nodes().len(), 2);
    }

    #[test]
    fn homogeneous_uniform() {
        let w = Weight::constant(1.0f64).unwrap();
        let g = Grid::build(&w, 12.0, 200).unwrap();
        assert!(g.cell_weights().iter().all(|&a| a == 1.0));
        let h0 = g.cell_width(0);
        assert!((0..g.n_cells()).all(|c| (g.cell_width(c) - h0).abs() < 1e-12));
    }

    #[test]
    fn too_small_domain() {
        assert!(matches!(Grid::build(&step(), 0.5, 200), Err(WallError::DomainTooSmall(_))));
        assert!(matches!(Grid::build(&step(), 12.0, 3), Err(WallError::InvalidGrid(_))));
    }

    #[test]
    fn non_aligned_breakpoints_become_nodes() {
        let w = Weight::from_segments(vec![-0.3337, 1.21], vec![1.5, 1.0, 3.0]).unwrap();
        let g = Grid::build(&w, 5.0, 10).unwrap();
        assert!(g.nodes().contains(&-0.3337));
        assert!(g.nodes().contains(&1.21));
        for c in 0..g.n_cells() {
            assert!(g.cell_width(c) <= 0.1 + 1e-12);
            assert_eq!(g.cell_weights()[c], w.eval(g.cell_midpoint(c)));
        }
        assert!(!g.is_symmetric());
    }

    #[test]
    fn masses_sum_to_length() {
        let g = Grid::build(&step(), 12.0, 50).unwrap();
        let total: f64 = (0..g.n_nodes()).map(|i| g.node_mass(i)).sum();
        assert!((total - 24.0).abs() < 1e-10);
        let weighted: f64 = (0..g.n_nodes()).map(|i| g.weighted_mass(i)).sum();
        assert!((weighted - 26.0).abs() < 1e-10);
    }

    #[test]
    fn intervals_split_at_jumps_and_origin() {
        let g = Grid::build(&step(), 4.0, 4).unwrap();
        let iv = g.constant_weight_intervals();
        assert_eq!(iv.len(), 4);
        let bounds: Vec<(f64, f64)> = iv.iter().map(|r| (g.nodes()[r.start], g.nodes()[r.end])).collect();
        assert_eq!(bounds, vec![(-4.0, -1.0), (-1.0, 0.0), (0.0, 1.0), (1.0, 4.0)]);
    }
}
