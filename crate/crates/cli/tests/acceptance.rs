//! Acceptance suite at the reference configuration: one PASS/FAIL line per
//! criterion, non-zero exit if any fails. Runs without the libtest harness
//! so the lines are never captured.

use std::process::ExitCode;

use sdheat::acceptance;
use sdheat::RunConfig;

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let outcomes = match acceptance::run_all(&cfg, 0, |o| {
        println!("{}", o.line());
        for v in o.verdicts.iter().filter(|v| !v.pass) {
            println!("    failed: {} (measured {:e}, bound {:e})", v.name, v.measured, v.bound);
        }
    }) {
        Ok(o) => o,
        Err(e) => {
            println!("acceptance setup failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let passed = outcomes.iter().filter(|o| o.pass()).count();
    println!("acceptance: {passed}/{} criteria passed", outcomes.len());
    if passed == outcomes.len() && outcomes.len() == 8 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
