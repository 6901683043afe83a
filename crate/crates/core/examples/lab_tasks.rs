//! Running a task file through the lab and printing the text and JSON reports.

use opalg::lab::{load_tasks, run_tasks, YAU_FIXTURE};

fn main() -> opalg::Result<()> {
    let report = run_tasks(&load_tasks(YAU_FIXTURE)?);
    print!("{}", report.to_text());
    println!("{}", report.deterministic_json());
    std::process::exit(report.exit_code());
}
