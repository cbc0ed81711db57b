//! Command-line entry point: parse flags, merge config sources, dispatch a
//! scenario, and write the CSV.
//!
//! Exit codes: 0 success, 2 usage/config parse errors, 3 physical or
//! structural validation failures, 4 numerical failures during integration.

use clap::Parser;
use kerrsim::config::{self, ConfigError};
use kerrsim::scenario;
use kerrsim::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kerrsim",
    about = "Cross-Kerr cavity simulator: photon-induced probe displacements and their noise",
    after_help = "Scenarios: rates, histogram, conditional, cascade, parity, validate"
)]
struct Cli {
    /// Scenario to run.
    scenario: String,

    /// Path to a `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a single config key, e.g. --set chi=0.1 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output CSV path (defaults to <scenario>.csv).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Random seed override.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: &Cli) -> Result<(), ExitCode> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            eprintln!("kerrsim: cannot read config {}: {e}", path.display());
            ExitCode::from(2)
        })?,
        None => String::new(),
    };

    let usage_err = |e: ConfigError| {
        eprintln!("kerrsim: {e}");
        ExitCode::from(2)
    };
    let mut cfg = config::parse_partial(&text).map_err(usage_err)?;
    cfg.set("scenario", &cli.scenario).map_err(|message| {
        usage_err(ConfigError::Usage(message))
    })?;
    for assignment in &cli.set {
        cfg.apply_override(assignment).map_err(usage_err)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.display().to_string());
    }
    let scenario = cfg.require_scenario().map_err(usage_err)?;

    let csv = scenario::run(scenario, &cfg).map_err(|e| {
        eprintln!("kerrsim: {e}");
        match e {
            Error::Quadrature(_) | Error::Numerical(_) => ExitCode::from(4),
            _ => ExitCode::from(3),
        }
    })?;

    if let Some(csv) = csv {
        let path = cfg
            .out
            .clone()
            .unwrap_or_else(|| format!("{}.csv", scenario.name()));
        if let Err(e) = std::fs::write(&path, csv) {
            eprintln!("kerrsim: cannot write {path}: {e}");
            // don't leave a truncated CSV behind
            let _ = std::fs::remove_file(&path);
            return Err(ExitCode::from(3));
        }
        eprintln!("kerrsim: wrote {path}");
    } else {
        eprintln!("kerrsim: configuration is valid");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
