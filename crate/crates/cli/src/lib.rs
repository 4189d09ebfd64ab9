//! Command-line front end: channel documents, seeded runs and CSV/JSON
//! reports.

pub mod channel;
pub mod commands;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

pub use commands::{execute, Cli, Command};
pub use error::{CliError, Result};
pub use output::RunReport;

/// Exit status for a finished run whose verification failed.
pub const EXIT_VERIFY: i32 = 2;
/// Exit status for usage, parse and I/O errors.
pub const EXIT_USAGE: i32 = 1;

/// Parses `args`, runs the command and writes results; returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            }
        }
    };
    let start = Instant::now();
    let mut report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    report.duration = start.elapsed();
    let common = cli.command.common();
    match output::emit(
        &report,
        common.format,
        common.out.as_deref(),
        cli.command.writes_bundle(),
    ) {
        Ok(Some(text)) => {
            let _ = stdout.write_all(text.as_bytes());
        }
        Ok(None) => {}
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    }
    let _ = writeln!(
        stderr,
        "{}: {:.3} s",
        report.command,
        report.duration.as_secs_f64()
    );
    if report.failed {
        let _ = writeln!(stderr, "{}: verification failed", report.command);
        EXIT_VERIFY
    } else {
        0
    }
}
