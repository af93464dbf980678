//! Command-line front end for `cwrdm-core`: file formats, reports and the
//! subcommands behind the `cwrdm` binary.

pub mod args;
pub mod commands;
pub mod io;
pub mod report;

use std::process::ExitCode;

pub use args::Cli;
pub use commands::{run, Outcome};

/// Exit code for bad arguments or invalid input content.
pub const EXIT_USAGE: u8 = 3;
/// Exit code for unreadable or unwritable files.
pub const EXIT_IO: u8 = 4;

/// Maps an error to its exit code.
pub fn error_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<io::IoFailure>()) {
        EXIT_IO
    } else {
        EXIT_USAGE
    }
}

/// Parses `argv`, runs the command and prints its output.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(o) => {
            print!("{}", o.stdout);
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
