mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap prints help to stdout and usage errors to stderr
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let command = match config::apply(cli) {
        Ok(c) => c,
        Err(f) => return report(f),
    };
    match commands::run(command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    eprintln!("error: {f}");
    ExitCode::from(f.exit_code())
}
