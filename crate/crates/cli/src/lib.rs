//! Command-line front end for the `optomech` library.
//!
//! Each subcommand resolves a [`config::RunConfig`], runs one library
//! operation, writes plot-ready CSV (plus a metadata sidecar) where it has
//! tabular output, and prints a JSON summary on stdout.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches};

use config::{Command, Kind, RunConfig, KEYS, OUT_DIR_ENV};
use optomech::{DynamicsError, Error, OracleError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("not converged: {0}")]
    Numeric(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Dynamics(DynamicsError::TruncationNotConverged { .. })
            | Error::Oracle(OracleError::StepNotConverged { .. })
            | Error::Oracle(OracleError::TruncationTooSmall(_))
            | Error::Oracle(OracleError::PeakAmbiguous { .. }) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        Error::from(e).into()
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        Error::from(e).into()
    }
}

fn subcommand(cmd: Command) -> clap::Command {
    let about = match cmd {
        Command::Kerr => "Print the Kerr and cross-Kerr coefficients and blockade detunings",
        Command::Spectrum => "Write the levels of the averaged Hamiltonian",
        Command::Evolve => "Write the mean-amplitude trajectory and revival summary",
        Command::Oracle => "Compare the closed form against Fock-space evolution",
        Command::Poincare => "Write a stroboscopic section and its dispersion",
    };
    let mut c = clap::Command::new(cmd.name()).about(about).arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key=value file; flags override it"),
    );
    for k in KEYS.iter().filter(|k| k.applies_to(cmd)) {
        let mut arg = Arg::new(k.name)
            .long(k.flag)
            .help(format!("{} [default: {}]", k.help, if k.default.is_empty() { "none" } else { k.default }))
            .action(ArgAction::Set)
            .allow_negative_numbers(true);
        if k.kind == Kind::Flag {
            arg = arg.num_args(0..=1).default_missing_value("true").value_name("BOOL");
        }
        c = c.arg(arg);
    }
    c
}

pub fn cli() -> clap::Command {
    Command::ALL.into_iter().fold(
        clap::Command::new("optomech")
            .version(env!("CARGO_PKG_VERSION"))
            .about("Optomechanics with linear, quadratic and cubic couplings")
            .subcommand_required(true)
            .arg_required_else_help(true),
        |app, cmd| app.subcommand(subcommand(cmd)),
    )
}

fn flag_values(cmd: Command, m: &ArgMatches) -> Vec<(&'static str, String)> {
    KEYS.iter()
        .filter(|k| k.applies_to(cmd))
        .filter(|k| m.value_source(k.name) == Some(ValueSource::CommandLine))
        .filter_map(|k| m.get_one::<String>(k.name).map(|v| (k.name, v.clone())))
        .collect()
}

/// Resolve the configuration for a parsed subcommand.
pub fn resolve(cmd: Command, m: &ArgMatches) -> Result<RunConfig, CliError> {
    let file = match m.get_one::<String>("config") {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            config::parse_file(path, &text)?
        }
        None => Vec::new(),
    };
    let env = std::env::var(OUT_DIR_ENV).ok();
    RunConfig::resolve(cmd, &file, &flag_values(cmd, m), env.as_deref())
}

/// Parse arguments, run, print the summary and return the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let cmd = Command::from_name(name).expect("registered subcommand");
    let outcome = resolve(cmd, sub).and_then(|cfg| commands::execute(&cfg));
    match outcome {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.summary).expect("summary is plain JSON");
            // A closed pipe (e.g. `| head`) is not an error of the run.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            match report.failed {
                Some(msg) => {
                    let e = CliError::Validation(msg);
                    eprintln!("optomech: {e}");
                    e.exit_code()
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("optomech: {e}");
            e.exit_code()
        }
    }
}
