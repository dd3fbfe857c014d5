//! Command-line front end: config parsing, subcommands and output files.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::Cli;
pub use config::{parse_config, ParsedConfig, RunConfig};
pub use error::CliError;

/// Runs the CLI on `args` (including the program name), writing data to
/// `out` and diagnostics to `err`. Returns the process exit status.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render();
            let _ = if code == 0 { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    match commands::run(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}
