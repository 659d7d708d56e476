//! Problem files, task execution and reports for the `gcgw` command.

pub mod fixtures;
pub mod problem;
pub mod report;
pub mod tasks;

use problem::{Problem, SchemaError};
use report::Report;

/// Loads a problem from JSON text and runs its tasks.
pub fn run_source(source: &str) -> Result<Report, SchemaError> {
    let p = problem::load(source)?;
    Ok(run_problem(&p))
}

pub fn run_problem(p: &Problem) -> Report {
    Report::new(&p.name, tasks::Runner::new(p).run_all())
}
