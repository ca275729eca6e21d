//! The `run` pipeline: solve → diagnostics → stability → prop1 → sweep → verify.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use wallforge::acceptance::WITNESS_EPSILONS;
use wallforge::diagnostics::node_first_integral;
use wallforge::oracles::translated_wall_energy_quadrature;
use wallforge::solver::oddness_defect;
use wallforge::stability::{instability_witness_step, witness_limit};
use wallforge::{
    assemble_operator, compute_flux, energy_g, first_integral, flux_monotonicity, smallest_eigenpair, solve_convex,
    solve_newton, translated_wall_energy, verify_solution, ClosedFormWall, Grid64, OperatorKind, Profile64,
    SolverOptions, StepWall64, Weight64,
};

use crate::config::{Analysis, RunConfig};
use crate::report::*;
use crate::CliError;

pub const PROFILE_FILE: &str = "profile.csv";
pub const REPORT_FILE: &str = "report.json";
/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "WALLFORGE_OUTPUT_DIR";

const CROSS_SOLVER_TOLERANCE: f64 = 1e-6;
const STABLE_EIGENVALUE_FLOOR: f64 = -1e-6;
const FLUX_JUMP_TOLERANCE: f64 = 1e-3;
const ODDNESS_TOLERANCE: f64 = 1e-10;

/// A file to write once all analyses are done.
struct Output {
    name: String,
    contents: String,
}

fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn profile_csv(p: &Profile64<'_>, w: &Weight64) -> String {
    let flux = compute_flux(w, p).node_flux;
    let fi = node_first_integral(p);
    let mut out = String::from("x,phi,flux,first_integral\n");
    for (i, &x) in p.grid().nodes().iter().enumerate() {
        let row = [x, p.values()[i], flux[i], fi[i]].map(csv_number);
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn vector_csv(g: &Grid64, v: &[f64]) -> String {
    let mut out = String::from("x,v\n");
    for (&x, &y) in g.nodes().iter().zip(v) {
        let _ = writeln!(out, "{},{}", csv_number(x), csv_number(y));
    }
    out
}

fn is_step_weight(w: &Weight64) -> bool {
    *w == StepWall64::weight()
}

/// Runs the configured analyses, filling `report` as it goes.
fn execute(config: &RunConfig, report: &mut Report, outputs: &mut Vec<Output>) -> Result<(), CliError> {
    let analyses = config.ordered_analyses();
    let w = config.weight()?;
    let opts = SolverOptions::from(&config.solver);
    opts.validate()?;
    let step = is_step_weight(&w);
    let needs_solve = analyses.iter().any(|a| *a != Analysis::Sweep && (*a != Analysis::Prop1 || step));
    let grid = if needs_solve { Some(Grid64::build(&w, config.half_length, config.cells_per_unit)?) } else { None };
    let solved = match &grid {
        Some(g) => Some(solve_newton(&w, g, &opts)?),
        None => None,
    };

    if let Some(r) = &solved {
        let p = &r.profile;
        outputs.push(Output { name: PROFILE_FILE.into(), contents: profile_csv(p, &w) });
        report.profile_file = Some(PROFILE_FILE.into());
        let mut section = SolveSection {
            path: r.path.as_str().into(),
            iterations: r.iterations,
            final_residual: r.final_residual,
            energy: energy_g(p),
            n_nodes: p.values().len(),
            convex_iterations: None,
            convex_residual: None,
            cross_solver_distance: None,
            convex_error: None,
        };
        if analyses.contains(&Analysis::Solve) {
            match solve_convex(&w, p.grid(), &opts) {
                Ok(c) => {
                    let dist = p.sup_distance(c.profile.values());
                    section.convex_iterations = Some(c.iterations);
                    section.convex_residual = Some(c.final_residual);
                    section.cross_solver_distance = Some(dist);
                    report.flag("cross_solver_agreement", dist <= CROSS_SOLVER_TOLERANCE);
                }
                Err(e) => {
                    section.convex_error = Some(e.to_string());
                    report.flag("cross_solver_agreement", false);
                }
            }
        }
        report.solve = Some(section);
    }

    for analysis in analyses {
        match analysis {
            Analysis::Solve => {}
            Analysis::Diagnostics => {
                let p = &solved.as_ref().expect("solved").profile;
                let f = compute_flux(&w, p);
                let m = flux_monotonicity(&w, &f);
                let fi = first_integral(&w, p);
                let min_flux = f.cell_flux.iter().copied().fold(f64::INFINITY, f64::min);
                report.flag("flux_positive", min_flux > 0.0);
                report.flag("flux_nonincreasing", m.flux_nonincreasing);
                if let Some(ok) = m.slope_nonincreasing {
                    report.flag("slope_nonincreasing", ok);
                }
                if !f.jumps.is_empty() {
                    report.flag("flux_continuity", f.max_node_jump() <= FLUX_JUMP_TOLERANCE);
                }
                report.diagnostics = Some(DiagnosticsSection {
                    min_flux,
                    center_flux: f.center_flux(),
                    jumps: f.jumps.iter().map(|j| JumpRecord { x: j.x, cell_jump: j.cell_jump, node_jump: j.node_jump }).collect(),
                    max_flux_increase: m.max_flux_increase,
                    max_slope_increase: m.max_slope_increase,
                    first_integral: fi
                        .per_interval
                        .iter()
                        .map(|iv| IntervalRecord {
                            x_start: iv.x_start,
                            x_end: iv.x_end,
                            weight: iv.weight,
                            mean: iv.mean,
                            max_deviation: iv.max_deviation,
                        })
                        .collect(),
                });
            }
            Analysis::Stability => {
                let p = &solved.as_ref().expect("solved").profile;
                let mut operators = Vec::new();
                let mut l0 = f64::NAN;
                let mut all_stable = true;
                for kind in [OperatorKind::L0, OperatorKind::L1, OperatorKind::L2] {
                    let r = smallest_eigenpair(&assemble_operator(kind, &w, p)?)?;
                    let witness_file = (r.smallest_eigenvalue < STABLE_EIGENVALUE_FLOOR).then(|| {
                        let name = format!("witness_{}.csv", kind.as_str());
                        outputs.push(Output { name: name.clone(), contents: vector_csv(p.grid(), &r.eigenvector) });
                        name
                    });
                    if kind == OperatorKind::L0 {
                        l0 = r.smallest_eigenvalue;
                    }
                    all_stable &= r.smallest_eigenvalue >= STABLE_EIGENVALUE_FLOOR;
                    report.flag(&format!("eigen_{}_converged", kind.as_str()), r.converged);
                    operators.push(OperatorRecord {
                        operator: kind.as_str().into(),
                        eigenvalue: r.smallest_eigenvalue,
                        converged: r.converged,
                        residual: r.residual,
                        center_pinned: r.center_pinned,
                        witness_file,
                    });
                }
                let traits = w.classify();
                let predicted_stable = traits.is_even && traits.is_nondecreasing_on_positive;
                if predicted_stable {
                    report.flag("stability_consistent", all_stable);
                }
                if step {
                    report.flag("step_weight_unstable", l0 < 0.0);
                }
                report.stability = Some(StabilitySection { operators, predicted_stable, unstable: l0 < 0.0 });
            }
            Analysis::Prop1 => {
                let closed = StepWall64::build()?;
                let limit = witness_limit(&closed);
                let reach = 1.0 + 2.0 / WITNESS_EPSILONS[WITNESS_EPSILONS.len() - 1] + 1.0;
                let sw = StepWall64::weight();
                let wg = Grid64::build(&sw, config.half_length.max(reach), config.cells_per_unit)?;
                let mut witnesses = Vec::new();
                for eps in WITNESS_EPSILONS {
                    let wit = instability_witness_step(eps, &closed, &wg)?;
                    witnesses.push(WitnessRecord { epsilon: eps, q_value: wit.q_value, error: (wit.q_value / 2.0 - limit).abs() });
                }
                report.flag("matching_condition", closed.matching_defect().abs() <= 1e-10);
                report.flag("witness_negative", witnesses.iter().all(|w| w.q_value < 0.0));
                report.flag("witness_error_monotone", witnesses.windows(2).all(|w| w[1].error < w[0].error));
                let mut section = Prop1Section {
                    applicable: step,
                    d: closed.d,
                    phi_at_1: closed.phi_at_1,
                    matching_defect: closed.matching_defect(),
                    witness_limit: limit,
                    witnesses,
                    newton_center_slope: None,
                    half_center_flux: None,
                    oracle_sup_distance: None,
                };
                if let (true, Some(r)) = (step, &solved) {
                    let p = &r.profile;
                    let z = p.grid().zero_index();
                    let slope = p.slopes()[z];
                    let half_flux = compute_flux(&w, p).center_flux() / 2.0;
                    let samples: Vec<f64> = p.grid().nodes().iter().map(|&x| closed.phi(x)).collect();
                    let dist = p.sup_distance(&samples);
                    report.flag("center_slope_routes", (slope - closed.d).abs() <= 1e-3 && (half_flux - closed.d).abs() <= 1e-3);
                    report.flag("oracle_agreement", dist <= 1e-3);
                    section.newton_center_slope = Some(slope);
                    section.half_center_flux = Some(half_flux);
                    section.oracle_sup_distance = Some(dist);
                }
                report.prop1 = Some(section);
            }
            Analysis::Sweep => {
                let x0s = config.sweep.as_ref().map(|s| s.x0_values.clone()).unwrap_or_default();
                let points: Vec<Result<SweepPoint, CliError>> = x0s
                    .par_iter()
                    .map(|&x0| {
                        Ok(SweepPoint {
                            x0,
                            energy: translated_wall_energy_quadrature(&w, x0)?,
                            formula: step.then(|| translated_wall_energy(x0)),
                        })
                    })
                    .collect();
                let points = points.into_iter().collect::<Result<Vec<_>, _>>()?;
                if step {
                    let mut ordered: Vec<&SweepPoint> = points.iter().filter(|p| p.x0 >= 1.0).collect();
                    ordered.sort_by(|a, b| a.x0.total_cmp(&b.x0));
                    let f: Vec<f64> = ordered.iter().filter_map(|p| p.formula).collect();
                    report.flag("sweep_decreasing", f.windows(2).all(|v| v[1] < v[0]));
                    report.flag("sweep_above_four", points.iter().filter_map(|p| p.formula).all(|v| v > 4.0));
                    report.flag(
                        "sweep_quadrature",
                        points.iter().all(|p| p.formula.is_some_and(|f| (f - p.energy).abs() <= 1e-6)),
                    );
                }
                report.sweep = Some(SweepSection { points });
            }
            Analysis::Verify => {
                let r = solved.as_ref().expect("solved");
                let check = verify_solution(&w, r);
                let energy = energy_g(&r.profile);
                report.flag("monotone", check.monotone);
                report.flag("in_range", check.in_range);
                report.flag("verify_flux_positive", check.flux_positive);
                report.flag("el_residual", check.el_residual_ok);
                if w.classify().is_even {
                    let odd = oddness_defect(&r.profile);
                    report.flag("odd", odd <= ODDNESS_TOLERANCE);
                }
                if w.is_constant() {
                    // for a ≡ c the wall energy is 4c
                    let c = w.segment_values()[0];
                    report.flag("homogeneous_energy", (energy - 4.0 * c).abs() <= 1e-3 * c);
                }
                report.verify = Some(VerifySection {
                    monotone: check.monotone,
                    in_range: check.in_range,
                    flux_positive: check.flux_positive,
                    el_residual: check.el_residual,
                    oddness_defect: check.oddness_defect,
                    energy,
                });
            }
        }
    }
    Ok(())
}

/// Outcome of a `run`: the report as written and the process exit code.
pub struct RunOutcome {
    pub report: Report,
    pub output_dir: PathBuf,
    pub exit_code: i32,
}

/// Executes a config file and writes `report.json` (plus `profile.csv` when a wall was solved).
/// Exit codes: 0 all flags pass, 2 some flag failed, 1 configuration or runtime error.
pub fn run(config_path: &Path, output_override: Option<PathBuf>) -> RunOutcome {
    let parsed = RunConfig::load(config_path);
    let output_dir = output_override
        .or_else(|| parsed.as_ref().ok().map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("wallforge-output"));
    let mut report = Report::new(parsed.as_ref().ok().cloned());
    let mut outputs = Vec::new();
    let result = parsed.and_then(|config| execute(&config, &mut report, &mut outputs));
    if let Err(e) = result {
        report.status = Status::Error;
        report.error = Some(ErrorRecord { kind: e.kind().into(), message: e.to_string() });
    } else {
        if report.numbers().iter().any(|x| !x.is_finite()) {
            report.flag("finite_values", false);
        }
        report.status = if report.failed_flags().is_empty() { Status::Pass } else { Status::Fail };
    }
    let mut exit_code = match report.status {
        Status::Pass => 0,
        Status::Fail => 2,
        Status::Error => 1,
    };
    if let Err(e) = write_outputs(&output_dir, &report, &outputs) {
        eprintln!("wallforge: {e}");
        exit_code = 1;
    }
    RunOutcome { report, output_dir, exit_code }
}

fn write_outputs(dir: &Path, report: &Report, outputs: &[Output]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for o in outputs {
        std::fs::write(dir.join(&o.name), &o.contents)?;
    }
    let json = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(dir.join(REPORT_FILE), json)?;
    Ok(())
}
