//! `phonotype` command-line tool.
//!
//! Exit codes: 0 success, 1 domain errors (bad data), 2 usage errors
//! (bad invocation). Domain and usage errors print a structured JSON
//! object on stderr.

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use phonotype::Error;
use phonotype_cli::args::{Cli, Command};
use phonotype_cli::{commands, Logger};

fn error_kind(error: &Error) -> &'static str {
    if error.is_usage() {
        return "usage";
    }
    match error {
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => "io",
        _ => "domain",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Logger {
        quiet: cli.quiet,
        json: cli.json_logs,
    };
    let mut command = cli.command;
    let result = command.apply_config().and_then(|()| match &command {
        Command::Import(args) => commands::run_import(args, &log),
        Command::ContrastEval(args) => commands::run_contrast_eval(args, &log),
        Command::GenStream(args) => commands::run_gen_stream(args, &log),
        Command::Decode(args) => commands::run_decode(args, &log),
        Command::ScoreInventory(args) => commands::run_score_inventory(args, &log),
        Command::Induce(args) => commands::run_induce(args, &log),
        Command::NearestLangs(args) => commands::run_nearest_langs(args, &log),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            let usage = error.is_usage();
            eprintln!(
                "{}",
                json!({
                    "error": {
                        "kind": error_kind(&error),
                        "message": error.to_string(),
                        "usage": usage,
                    }
                })
            );
            if usage {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
