//! Verification front end: JSON documents for the core objects, reproducible reports and the
//! cases behind the command-line tool.

pub mod cases;
mod report;
pub mod schema;
mod task;

pub use report::{exit_code, Case, CaseTiming, Check, Provenance, ReportFile, Status, Summary, Timing, VerificationReport};
pub use task::{load_tasks, run_file, run_tasks, Task, TaskDoc, TaskFile, DEFAULT_YAU_BOUND};

/// The bundled task file checking the unital zero-algebra push-out.
pub const YAU_FIXTURE: &str = include_str!("../../fixtures/yau.json");
