//! Command-line front end: argument parsing, subcommands, and the JSON/CSV
//! report format they share.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;

pub use args::Cli;
pub use commands::{run, Outcome};
pub use error::{CliError, CliResult};
pub use report::{read_csv, read_report, read_table, Report, Table};
