//! `wallforge verify`: the acceptance suite as a table.

use wallforge::acceptance::{run_acceptance, AcceptanceOptions, AcceptanceReport};

pub fn table(report: &AcceptanceReport) -> String {
    let mut out = String::new();
    for c in &report.criteria {
        out.push_str(&c.summary());
        out.push('\n');
    }
    let passed = report.criteria.iter().filter(|c| c.passed).count();
    out.push_str(&format!("{passed}/{} criteria passed\n", report.criteria.len()));
    out
}

/// Runs the suite and prints the table; 0 when every criterion passes, 2 otherwise.
pub fn verify_all(opts: &AcceptanceOptions) -> i32 {
    let report = run_acceptance(opts);
    print!("{}", table(&report));
    if report.all_passed() {
        0
    } else {
        2
    }
}
