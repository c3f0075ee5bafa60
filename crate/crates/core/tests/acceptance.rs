//! Runs the acceptance suite and prints one line per criterion. Exits
//! nonzero if any criterion fails.

use std::process::ExitCode;

use robin_tunneling::acceptance::run_all;

fn main() -> ExitCode {
    let reports = run_all();
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if reports.len() != 8 || !failed.is_empty() {
        println!("acceptance: failed criteria {failed:?}");
        return ExitCode::FAILURE;
    }
    println!("acceptance: all {} criteria passed", reports.len());
    ExitCode::SUCCESS
}
