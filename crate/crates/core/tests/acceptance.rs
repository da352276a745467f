//! Runs every acceptance criterion and prints one line each. Plain `main` so
//! the table shows up without `--nocapture`.

use std::process::ExitCode;

use padic_confluence::acceptance::{run_all, AcceptanceConfig, CRITERIA};

fn main() -> ExitCode {
    let cfg = AcceptanceConfig::default();
    let results = run_all(&cfg);
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if results.len() != CRITERIA.len() || !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        return ExitCode::FAILURE;
    }
    println!("acceptance: {} of {} criteria passed", results.len(), CRITERIA.len());
    ExitCode::SUCCESS
}
