mod args;
mod commands;
mod table;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version print to stdout and succeed; every other
            // parse error is a usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Scan(a) => commands::scan(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Compare(a) => commands::compare(a),
        Command::Dos(a) => commands::dos_table(a),
        Command::Peaks(a) => commands::peaks(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(e) => eprintln!("error: {e:#}\n\nFor more information, try '--help'."),
                Failure::Runtime(e) => eprintln!("error: {e:#}"),
                Failure::Mismatch => eprintln!("error: simulation disagrees with the oracle"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
