//! Command-line front end for `field-slln` experiments.
//!
//! Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 failed
//! reference comparison. Errors are printed to stderr as one JSON line.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{dispatch, Cli, Command, Env};
pub use error::CliError;

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, env: &Env, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let err = CliError::validation(None, e.to_string().lines().next().unwrap_or("").to_string());
            let _ = writeln!(stderr, "{}", err.to_json_line());
            return err.exit_code();
        }
    };
    match dispatch(cli, env, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json_line());
            e.exit_code()
        }
    }
}
