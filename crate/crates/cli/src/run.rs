//! Scenario execution and output files.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use releq_core::bath::{self, Coefficients};
use releq_core::maxent::{self, SolverOptions};
use releq_core::oscillator::{self, OscillatorState};
use releq_core::tls::{self, TlsParams, TlsState};
use releq_core::Complex64;

use crate::config::{ConfigError, Model, OperatorSet, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(#[from] releq_core::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } => 2,
            Self::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    version: &'static str,
    config: &'a ScenarioConfig,
    solver: SolverSettings,
    rows: usize,
    wall_time_s: f64,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<Summary>,
}

#[derive(Debug, Serialize)]
struct SolverSettings {
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    cache_step: f64,
    integrator: &'static str,
}

#[derive(Debug, Serialize)]
struct Summary {
    phi: f64,
    entropy: f64,
}

/// Result of a finished run.
#[derive(Debug)]
pub struct RunReport {
    pub output: PathBuf,
    pub metadata: PathBuf,
    pub rows: usize,
    pub warnings: Vec<String>,
}

/// Metadata file next to `output`: `<stem>.meta.json`.
pub fn metadata_path(output: &Path) -> PathBuf {
    output.with_extension("meta.json")
}

/// Runs `config`, resolving a relative output path against `base_dir`.
pub fn run(config: &ScenarioConfig, base_dir: &Path) -> Result<RunReport, RunError> {
    config.validate()?;
    let start = Instant::now();
    let mut warnings = Vec::new();
    let mut summary = None;

    let body = match config.model {
        Model::Oscillator => oscillator_rows(config)?,
        Model::Tls => {
            let (rows, w) = tls_rows(config)?;
            warnings.extend(w);
            rows
        }
        Model::Corr => corr_rows(config)?,
        Model::MaxentSolve => {
            let (rows, s) = maxent_rows(config)?;
            summary = Some(s);
            rows
        }
    };
    let rows = body.lines().count().saturating_sub(1);

    let output = base_dir.join(&config.output_path);
    write_file(&output, body.as_bytes())?;

    let tol = config.tolerances;
    let meta = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        config,
        solver: SolverSettings {
            rel_tol: tol.rel_tol,
            abs_tol: tol.abs_tol,
            max_step: tol.max_step,
            cache_step: tol.cache_step,
            integrator: "dormand-prince 5(4)",
        },
        rows,
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings: warnings.clone(),
        summary,
    };
    let metadata = metadata_path(&output);
    let mut json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    json.push('\n');
    write_file(&metadata, json.as_bytes())?;

    Ok(RunReport {
        output,
        metadata,
        rows,
        warnings,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    out.write_all(bytes).map_err(io)?;
    out.flush().map_err(io)
}

fn coefficients(config: &ScenarioConfig, times: &[f64]) -> Result<Coefficients, RunError> {
    let t_end = times.last().copied().unwrap_or(0.0);
    Ok(Coefficients::new(
        config.bath()?,
        config.regime,
        t_end,
        config.tolerances.cache_step,
    )?)
}

fn oscillator_rows(config: &ScenarioConfig) -> Result<String, RunError> {
    let mut out = String::from("t,re_a,im_a,n,S,beta\n");
    let times = config.sample_times();
    if times.is_empty() {
        return Ok(out);
    }
    let v = &config.initial;
    let init = OscillatorState::new(Complex64::new(v[0], v[1]), v[2]);
    let coeffs = coefficients(config, &times)?;
    for s in oscillator::simulate(&init, &coeffs, &times, &config.tolerances.simulation())? {
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?}",
            s.t, s.state.mean_a.re, s.state.mean_a.im, s.state.mean_n, s.entropy, s.beta
        )
        .unwrap();
    }
    Ok(out)
}

fn tls_rows(config: &ScenarioConfig) -> Result<(String, Vec<String>), RunError> {
    let mut out = String::from("t,sz,re_sp,im_sp,S,beta\n");
    let bath_p = config.bath()?;
    let params = TlsParams::resonant(config.params.rabi.unwrap_or(0.0), bath_p)?;
    let warnings = params.warnings();
    let times = config.sample_times();
    if times.is_empty() {
        return Ok((out, warnings));
    }
    let v = &config.initial;
    let init = TlsState::new(v[0], Complex64::new(v[1], v[2]));
    let coeffs = coefficients(config, &times)?;
    for s in tls::simulate(&init, &params, &coeffs, &times, &config.tolerances.simulation())? {
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?}",
            s.t, s.state.mean_sz, s.state.mean_sp.re, s.state.mean_sp.im, s.entropy, s.beta
        )
        .unwrap();
    }
    Ok((out, warnings))
}

fn corr_rows(config: &ScenarioConfig) -> Result<String, RunError> {
    let p = config.bath()?;
    let samples = config
        .sample_times()
        .into_iter()
        .map(|t| bath::sample(t, &p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut buf = Vec::new();
    bath::write_samples_csv(&mut buf, &samples).expect("writing to memory");
    Ok(String::from_utf8(buf).expect("ascii csv"))
}

fn maxent_rows(config: &ScenarioConfig) -> Result<(String, Summary), RunError> {
    let v = &config.initial;
    let (ops, targets, names) = match config.operators.expect("validated") {
        OperatorSet::SpinHalf => {
            let sp = Complex64::new(v[1], v[2]);
            (
                tls::relevant_operators()?,
                vec![sp, Complex64::new(v[0], 0.0), sp.conj()],
                ["sigma_plus", "sigma_z", "sigma_minus"],
            )
        }
        OperatorSet::Fock(levels) => {
            let a = Complex64::new(v[0], v[1]);
            (
                oscillator::relevant_operators(levels)?,
                vec![a.conj(), Complex64::new(v[2], 0.0), a],
                ["a_dagger", "number", "a"],
            )
        }
    };
    let f = maxent::solve_self_consistency(&targets, &ops, None, SolverOptions::default())?;
    let state = maxent::build_state(&f, &ops)?;
    let entropy = maxent::entropy(&state, &targets)?;
    let mut out = String::from("operator,re_target,im_target,re_F,im_F\n");
    for ((name, t), m) in names.iter().zip(&targets).zip(f.values()) {
        writeln!(out, "{name},{:?},{:?},{:?},{:?}", t.re, t.im, m.re, m.im).unwrap();
    }
    Ok((
        out,
        Summary {
            phi: state.phi,
            entropy,
        },
    ))
}
