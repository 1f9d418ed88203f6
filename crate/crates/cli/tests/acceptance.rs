//! The full acceptance battery: one PASS/FAIL line per criterion.
//!
//! Runs without the test harness so the lines always print:
//! `cargo test -p binlab-cli --test acceptance`.

use std::process::ExitCode;

use binlab_cli::suite::{run_criterion, SuiteConfig};

const SEED: u64 = 20261018;

fn main() -> ExitCode {
    let cfg = SuiteConfig::full(SEED);
    let mut failed = Vec::new();
    for id in 1..=11 {
        let outcome = run_criterion(id, &cfg);
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(id);
        }
    }
    println!("seed {SEED}");
    if failed.is_empty() {
        println!("acceptance: all 11 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
