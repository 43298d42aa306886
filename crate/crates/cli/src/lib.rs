//! Command-line front end: instance and report files, SDPA import and the
//! `analyze`, `verify`, `generate`, `probe` and `import-sdpa` commands.
//!
//! Exit codes: `analyze` returns 0 for feasible, 3 for infeasible and 2 when
//! undecided; `verify` returns 0 when the report is accepted and 1 when it is
//! rejected. Malformed input gives 64, internal failures 70 and an exhausted
//! generator 75.

mod commands;
pub mod error;
pub mod instance;
pub mod report;
pub mod sdpa;

pub use commands::{
    analyze_instance, generate_instance, run, EXIT_ACCEPTED, EXIT_FEASIBLE, EXIT_INFEASIBLE, EXIT_REJECTED,
    EXIT_UNDECIDED,
};
pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_INTERNAL, EXIT_RESAMPLE};
pub use instance::InstanceFile;
pub use report::ReportFile;
