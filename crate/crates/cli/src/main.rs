//! `fogtrace` command-line driver.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (bad config or input
//! file), 3 runtime error (output I/O, bind failure, service fault).

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Compare(a) => commands::compare(a),
        Command::Serve(a) => commands::serve(a),
        Command::Inspect(a) => commands::inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
