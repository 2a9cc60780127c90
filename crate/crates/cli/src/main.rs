use std::process::ExitCode;

use clap::Parser;

use lift_spectra_cli::{run, Cli};

/// Exit code when an inequality check finds a counterexample.
const COUNTEREXAMPLE: u8 = 5;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) if outcome.violations > 0 => {
            eprintln!("error: {} inequality check(s) found a counterexample", outcome.violations);
            ExitCode::from(COUNTEREXAMPLE)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
