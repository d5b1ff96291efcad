use std::process::ExitCode;
use std::time::{Duration, Instant};

use ffdivisor::harness::verify;

const TOTAL_LIMIT: Duration = Duration::from_secs(600);

fn main() -> ExitCode {
    let start = Instant::now();
    let outcomes = verify::run_all(false, |o| println!("{}", o.line()));
    let total = start.elapsed();
    let passed = outcomes.iter().filter(|o| o.ok()).count();
    let in_time = total <= TOTAL_LIMIT;
    println!(
        "acceptance: {passed}/{} criteria passed, total {:.1}s (limit {}s){}",
        outcomes.len(),
        total.as_secs_f64(),
        TOTAL_LIMIT.as_secs(),
        if in_time { "" } else { ", over the total time limit" }
    );
    if verify::all_ok(&outcomes) && in_time {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
