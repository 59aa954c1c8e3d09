use clap::Parser;
use oddrmt_cli::args::Cli;
use oddrmt_cli::{run, CliError};
use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command).and_then(|(outcome, common)| {
        match &common.out {
            Some(path) => std::fs::write(path, &outcome.body)?,
            None => std::io::stdout().write_all(outcome.body.as_bytes())?,
        }
        Ok::<_, CliError>(outcome)
    }) {
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("FAILED {f}");
            }
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("oddrmt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
