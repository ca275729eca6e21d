//! `report.json` schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: &str = "wallforge-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSection {
    pub path: String,
    pub iterations: usize,
    pub final_residual: f64,
    pub energy: f64,
    pub n_nodes: usize,
    pub convex_iterations: Option<usize>,
    pub convex_residual: Option<f64>,
    /// Sup-norm distance between the Newton and convex profiles.
    pub cross_solver_distance: Option<f64>,
    pub convex_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub x: f64,
    pub cell_jump: f64,
    pub node_jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub x_start: f64,
    pub x_end: f64,
    pub weight: f64,
    pub mean: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSection {
    pub min_flux: f64,
    pub center_flux: f64,
    pub jumps: Vec<JumpRecord>,
    pub max_flux_increase: f64,
    pub max_slope_increase: Option<f64>,
    pub first_integral: Vec<IntervalRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorRecord {
    pub operator: String,
    pub eigenvalue: f64,
    pub converged: bool,
    pub residual: f64,
    pub center_pinned: bool,
    /// CSV with the eigenvector, written when the eigenvalue is negative.
    pub witness_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySection {
    pub operators: Vec<OperatorRecord>,
    /// Even weight, non-decreasing on the positive half-line.
    pub predicted_stable: bool,
    /// Smallest `L0` eigenvalue is negative.
    pub unstable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub epsilon: f64,
    pub q_value: f64,
    /// `|Q/2 − limit|`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Section {
    /// The configured weight is the step weight 2 on (−1, 1), 1 outside.
    pub applicable: bool,
    pub d: f64,
    pub phi_at_1: f64,
    pub matching_defect: f64,
    pub witness_limit: f64,
    pub witnesses: Vec<WitnessRecord>,
    pub newton_center_slope: Option<f64>,
    pub half_center_flux: Option<f64>,
    pub oracle_sup_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x0: f64,
    /// Direct quadrature of `G` for the translated homogeneous wall under the configured weight.
    pub energy: f64,
    /// `4 + 2[sin φ̂]₋₁¹`, reported for the step weight.
    pub formula: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySection {
    pub monotone: bool,
    pub in_range: bool,
    pub flux_positive: bool,
    pub el_residual: f64,
    pub oddness_defect: Option<f64>,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub status: Status,
    pub config: Option<RunConfig>,
    pub solve: Option<SolveSection>,
    pub diagnostics: Option<DiagnosticsSection>,
    pub stability: Option<StabilitySection>,
    pub prop1: Option<Prop1Section>,
    pub sweep: Option<SweepSection>,
    pub verify: Option<VerifySection>,
    /// Pass/fail checks; the run fails if any is false.
    pub flags: BTreeMap<String, bool>,
    pub profile_file: Option<String>,
    pub error: Option<ErrorRecord>,
}

impl Report {
    pub fn new(config: Option<RunConfig>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            status: Status::Pass,
            config,
            solve: None,
            diagnostics: None,
            stability: None,
            prop1: None,
            sweep: None,
            verify: None,
            flags: BTreeMap::new(),
            profile_file: None,
            error: None,
        }
    }

    pub fn flag(&mut self, name: &str, ok: bool) {
        self.flags.insert(name.into(), ok);
    }

    pub fn failed_flags(&self) -> Vec<&str> {
        self.flags.iter().filter(|(_, &ok)| !ok).map(|(k, _)| k.as_str()).collect()
    }

    /// Every number in the report, for the finiteness check.
    pub fn numbers(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(s) = &self.solve {
            out.extend([s.final_residual, s.energy]);
            out.extend(s.convex_residual);
            out.extend(s.cross_solver_distance);
        }
        if let Some(d) = &self.diagnostics {
            out.extend([d.min_flux, d.center_flux, d.max_flux_increase]);
            out.extend(d.max_slope_increase);
            out.extend(d.jumps.iter().flat_map(|j| [j.x, j.cell_jump, j.node_jump]));
            out.extend(d.first_integral.iter().flat_map(|i| [i.x_start, i.x_end, i.weight, i.mean, i.max_deviation]));
        }
        if let Some(s) = &self.stability {
            out.extend(s.operators.iter().flat_map(|o| [o.eigenvalue, o.residual]));
        }
        if let Some(p) = &self.prop1 {
            out.extend([p.d, p.phi_at_1, p.matching_defect, p.witness_limit]);
            out.extend(p.witnesses.iter().flat_map(|w| [w.epsilon, w.q_value, w.error]));
            out.extend(p.newton_center_slope);
            out.extend(p.half_center_flux);
            out.extend(p.oracle_sup_distance);
        }
        if let Some(s) = &self.sweep {
            out.extend(s.points.iter().flat_map(|p| [p.x0, p.energy]));
            out.extend(s.points.iter().filter_map(|p| p.formula));
        }
        if let Some(v) = &self.verify {
            out.extend([v.el_residual, v.energy]);
            out.extend(v.oddness_defect);
        }
        out
    }
}
