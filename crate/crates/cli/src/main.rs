//! `releq`: runs oscillator, two-level, correlator and maximum-entropy
//! scenarios from JSON configuration files and writes CSV plus metadata.

mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;

use releq_core::bath::Regime;

use config::{ConfigError, Model, ScenarioConfig};
use run::RunError;

#[derive(Debug, Parser)]
#[command(name = "releq", version, about = "Non-equilibrium entropy and temperature of open quantum systems")]
struct Cli {
    /// Model to run; must match the `model` field of the configuration.
    #[arg(value_enum)]
    model: Model,
    /// Scenario configuration (JSON).
    #[arg(long, required_unless_present = "sweep", conflicts_with = "sweep")]
    config: Option<PathBuf>,
    /// Force the Markovian (constant-coefficient) regime.
    #[arg(long)]
    markovian: bool,
    /// Output CSV path, overriding `output_path`.
    #[arg(long, conflicts_with = "sweep")]
    output: Option<PathBuf>,
    /// Run every `*.json` configuration in this directory concurrently.
    #[arg(long)]
    sweep: Option<PathBuf>,
}

fn prepare(cli: &Cli, path: &Path) -> Result<ScenarioConfig, RunError> {
    let mut cfg = ScenarioConfig::load(path)?;
    if cfg.model != cli.model {
        return Err(ConfigError::Invalid(format!(
            "{} describes model {}, not {}",
            path.display(),
            cfg.model.name(),
            cli.model.name()
        ))
        .into());
    }
    if cli.markovian {
        cfg.regime = Regime::Markovian;
    }
    if let Some(out) = &cli.output {
        cfg.output_path = out.clone();
    }
    Ok(cfg)
}

fn run_one(cli: &Cli, path: &Path) -> Result<run::RunReport, RunError> {
    let cfg = prepare(cli, path)?;
    // --output is taken relative to the working directory, config paths
    // relative to the config file
    let base = if cli.output.is_some() {
        PathBuf::new()
    } else {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    };
    run::run(&cfg, &base)
}

fn report(path: &Path, result: &Result<run::RunReport, RunError>) -> u8 {
    match result {
        Ok(r) => {
            for w in &r.warnings {
                eprintln!("warning: {}: {w}", path.display());
            }
            eprintln!(
                "{}: {} rows -> {} ({})",
                path.display(),
                r.rows,
                r.output.display(),
                r.metadata.display()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            e.exit_code()
        }
    }
}

fn sweep_configs(dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let read = |source| {
        RunError::Config(ConfigError::Read {
            path: dir.to_owned(),
            source,
        })
    };
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(read)? {
        let path = entry.map_err(read)?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.ends_with(".json") && !name.ends_with(".meta.json") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(ConfigError::Invalid(format!("no configurations in {}", dir.display())).into());
    }
    Ok(paths)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match (&cli.config, &cli.sweep) {
        (Some(path), _) => report(path, &run_one(&cli, path)),
        (None, Some(dir)) => match sweep_configs(dir) {
            Ok(paths) => paths
                .par_iter()
                .map(|p| (p, run_one(&cli, p)))
                .collect::<Vec<_>>()
                .iter()
                .map(|(p, r)| report(p, r))
                .max()
                .unwrap_or(0),
            Err(e) => report(dir, &Err(e)),
        },
        (None, None) => unreachable!("clap requires --config or --sweep"),
    };
    ExitCode::from(code)
}
