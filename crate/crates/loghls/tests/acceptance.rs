//! Acceptance criteria 1 through 12, one line per criterion.

use std::process::ExitCode;

use loghls::scenarios::{criterion, run_all, Settings};

fn main() -> ExitCode {
    let scenarios: Vec<_> = (1..=12).map(|c| criterion(c).expect("every criterion is registered")).collect();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut failures = 0;
    for (scenario, result) in run_all(&scenarios, &Settings::default(), jobs) {
        let c = scenario.criterion.unwrap_or_default();
        match result {
            Ok(outcome) => {
                if !outcome.passed() {
                    failures += 1;
                    print!("{}", outcome.report());
                }
                println!("{}", outcome.line());
            }
            Err(e) => {
                failures += 1;
                println!("criterion {c:>2} FAIL {}: error: {e}", scenario.name);
            }
        }
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failures);
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
