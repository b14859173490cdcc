//! Command-line front end for `ehaoi-core`: single-point analysis,
//! parameter sweeps, simulation runs and matrix-geometric solves, emitting
//! JSON or CSV.
//!
//! Exit codes: 0 success, 1 failed self-test or i/o error, 2 invalid
//! parameters, 3 divergent penalty, 4 unsupported combination, 5 solver
//! non-convergence.

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod failure;
pub mod record;

use args::{Cli, Command};
use failure::Failure;

/// Environment variable naming the directory that relative `--output` and
/// `--event-log` paths resolve against.
pub const OUTPUT_DIR_ENV: &str = "EHAOI_OUTPUT_DIR";

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand(args) {
        Ok(a) => a,
        Err(f) => return report(stderr, f),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    failure::EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    failure::EXIT_INVALID
                }
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze::run(&a, stdout),
        Command::Sweep(a) => commands::sweep::run(&a, stdout),
        Command::Simulate(a) => commands::simulate::run(&a, stdout),
        Command::Qbd(a) => commands::qbd::run(&a, stdout),
        Command::Selftest(a) => commands::selftest::run(&a, stdout),
    };
    match result {
        Ok(()) => failure::EXIT_OK,
        Err(f) => report(stderr, f),
    }
}

fn report(stderr: &mut dyn Write, f: Failure) -> u8 {
    let _ = writeln!(stderr, "error: {}", f.message);
    f.code
}
