//! `popqc` command-line tool.
//!
//! Exit status: 0 success, 1 unreadable or malformed input, 2 oracle failure,
//! 3 round cap reached before convergence, 4 circuits not equivalent, 5 not
//! locally optimal, 64 usage error, 70 invariant audit failed, 74 output
//! could not be written.

mod args;
mod bench;
mod common;
mod generate;
mod optimize;
mod verify;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::common::exit;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("POPQC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Optimize(a) => optimize::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Bench(a) => bench::run(a),
        Command::Generate(a) => generate::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("popqc: {f}");
            ExitCode::from(f.code)
        }
    }
}
