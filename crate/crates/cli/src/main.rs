//! `kgband`: command-line driver for the bandlimited Klein-Gordon numerics.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical-accuracy
//! failure, 4 internal error.

// `!(x > 0.0)` guards are kept because they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Arg, ArgAction, ArgMatches};

use crate::config::{Command, Format, RunConfig, KEYS};
use crate::error::CliError;

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn cli() -> clap::Command {
    let mut cmd = clap::Command::new("kgband")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Bandlimited Klein-Gordon vacuum: moments, entanglement, sampling and oracle checks")
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("PATH")
                .help("key = value file, or an earlier JSON output whose config is reused"),
        )
        .arg(
            Arg::new("timing")
                .long("timing")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("record wall time in the output metadata"),
        );
    for (key, help) in KEYS {
        let name = flag_name(key);
        cmd = cmd.arg(
            Arg::new(*key)
                .long(name)
                .global(true)
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .help(*help),
        );
    }
    for (_, name, about) in Command::ALL {
        cmd = cmd.subcommand(clap::Command::new(name).about(about));
    }
    cmd
}

fn resolve(command: Command, matches: &ArgMatches) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(command);
    if let Some(path) = matches.get_one::<String>("config") {
        cfg.apply_file(&PathBuf::from(path))?;
    }
    for (key, _) in KEYS {
        if let Some(v) = matches.get_one::<String>(key) {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(matches: &ArgMatches) -> Result<Option<String>, CliError> {
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command = Command::from_name(name).expect("subcommands come from Command::ALL");
    let cfg = resolve(command, sub)?;
    let start = Instant::now();
    let outcome = commands::run(&cfg)?;
    let wall = sub.get_flag("timing").then(|| start.elapsed().as_secs_f64());
    let text = match cfg.format {
        Format::Json => output::to_json(&cfg, &outcome, wall),
        Format::Csv => output::to_csv(&outcome),
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(outcome.accuracy_failure)
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match execute(&matches) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("error: {failure}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
