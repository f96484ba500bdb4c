//! File formats, the experiment harness and the `qnmf` command line on top
//! of `qnmf-core`.

pub mod artifacts;
pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;
pub mod solve;

pub use cli::Cli;
pub use commands::run;
pub use error::{CliError, CliResult};
pub use report::RunReport;
