//! Command-line front end: problem files, bundled fixtures, reports and the
//! benchmark harness.

pub mod args;
pub mod commands;
pub mod error;
pub mod fixtures;
pub mod output;
pub mod problem;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::commands::{execute, Context};
use crate::error::CliError;

/// Runs one invocation and returns the exit code: 0 success, 1 usage or
/// input error, 2 numerical failure, 3 verification mismatch.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let ctx = Context {
        timings: cli.timings,
    };
    let start = std::time::Instant::now();
    let outcome = match execute(&cli.command, ctx) {
        Ok(o) => o,
        Err(e) => return fail(stderr, &e),
    };
    let mut report = outcome.report;
    if cli.timings {
        if let Some(obj) = report.json.as_object_mut() {
            obj.insert(
                "elapsed_seconds".into(),
                output::num(start.elapsed().as_secs_f64()),
            );
        }
    }
    let text = report.render(cli.format);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        return fail(
            stderr,
            &CliError::Usage(format!("cannot write output: {e}")),
        );
    }
    match outcome.failure {
        Some(e) => fail(stderr, &e),
        None => 0,
    }
}

fn fail(stderr: &mut dyn Write, e: &CliError) -> i32 {
    let _ = writeln!(stderr, "invpair: {e}");
    e.exit_code()
}
