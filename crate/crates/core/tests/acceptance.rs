use wallforge::acceptance::{run_acceptance, AcceptanceOptions};

#[test]
fn acceptance_criteria() {
    let report = run_acceptance(&AcceptanceOptions::default());
    for c in &report.criteria {
        println!("{}", c.summary());
    }
    let failed: Vec<u8> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
