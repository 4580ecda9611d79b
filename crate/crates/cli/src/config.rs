//! Scenario configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use releq_core::bath::{BathParams, Regime};
use releq_core::SimulationOptions;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Oscillator,
    Tls,
    Corr,
    MaxentSolve,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Self::Oscillator => "oscillator",
            Self::Tls => "tls",
            Self::Corr => "corr",
            Self::MaxentSolve => "maxent_solve",
        }
    }

    fn has_time_axis(self) -> bool {
        !matches!(self, Self::MaxentSolve)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub omega0: f64,
    #[serde(rename = "W")]
    pub cutoff: f64,
    pub beta_bath: f64,
    #[serde(rename = "Omega", default, skip_serializing_if = "Option::is_none")]
    pub rabi: Option<f64>,
    #[serde(rename = "omegaL", default, skip_serializing_if = "Option::is_none")]
    pub omega_l: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// Largest integrator step, in units of `1/omega0`.
    #[serde(default = "default_max_step")]
    pub max_step: f64,
    /// Grid spacing of the tabulated bath correlators.
    #[serde(default = "default_cache_step")]
    pub cache_step: f64,
}

fn default_rel_tol() -> f64 {
    SimulationOptions::default().rel_tol
}

fn default_abs_tol() -> f64 {
    SimulationOptions::default().abs_tol
}

fn default_max_step() -> f64 {
    SimulationOptions::default().max_step
}

fn default_cache_step() -> f64 {
    releq_core::bath::DEFAULT_CACHE_STEP
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_step: default_max_step(),
            cache_step: default_cache_step(),
        }
    }
}

impl Tolerances {
    pub fn simulation(&self) -> SimulationOptions {
        SimulationOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
        }
    }
}

/// Fock-space size or spin-½ for `maxent_solve`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSet {
    SpinHalf,
    Fock(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: Model,
    pub params: Params,
    /// oscillator: `[re_a, im_a, n]`; tls: `[sz, re_sp, im_sp]`;
    /// maxent_solve: the same lists as targets, by operator set.
    #[serde(default)]
    pub initial: Vec<f64>,
    #[serde(default = "default_regime")]
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_out: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<OperatorSet>,
    pub output_path: PathBuf,
}

fn default_regime() -> Regime {
    Regime::NonMarkovian
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn bath(&self) -> Result<BathParams, ConfigError> {
        BathParams::new(self.params.cutoff, self.params.beta_bath, self.params.omega0)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        self.bath()?;
        if self.model.has_time_axis() {
            match (self.t_max, self.dt_out) {
                (Some(t), Some(dt)) => {
                    if !(t.is_finite() && t >= 0.0) {
                        return invalid(format!("t_max must be finite and non-negative, got {t}"));
                    }
                    if !(dt.is_finite() && dt > 0.0) {
                        return invalid(format!("dt_out must be positive, got {dt}"));
                    }
                }
                _ => return invalid(format!("model {} needs t_max and dt_out", self.model.name())),
            }
        }
        let tol = &self.tolerances;
        if !(tol.rel_tol > 0.0 && tol.rel_tol <= 1e-2 && tol.abs_tol > 0.0 && tol.abs_tol <= 1e-2) {
            return invalid("tolerances must lie in (0, 1e-2]".into());
        }
        if !(tol.max_step > 0.0 && tol.max_step.is_finite() && tol.cache_step > 0.0 && tol.cache_step <= 0.1) {
            return invalid("max_step must be positive and cache_step in (0, 0.1]".into());
        }
        let want_initial = match (self.model, self.operators) {
            (Model::Oscillator, _) | (Model::MaxentSolve, Some(OperatorSet::Fock(_))) => 3,
            (Model::Tls, _) | (Model::MaxentSolve, Some(OperatorSet::SpinHalf)) => 3,
            (Model::MaxentSolve, None) => return invalid("maxent_solve needs an operator set".into()),
            (Model::Corr, _) => 0,
        };
        if want_initial > 0 && self.initial.len() != want_initial {
            return invalid(format!(
                "model {} expects {want_initial} initial values, got {}",
                self.model.name(),
                self.initial.len()
            ));
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return invalid("initial values must be finite".into());
        }
        if self.model == Model::Tls {
            if self.params.rabi.is_none() {
                return invalid("model tls needs params.Omega".into());
            }
            if let Some(wl) = self.params.omega_l {
                if (wl - self.params.omega0).abs() > 1e-12 * self.params.omega0 {
                    return invalid(format!(
                        "transport equations hold at resonance only: omegaL = {wl}, omega0 = {}",
                        self.params.omega0
                    ));
                }
            }
        }
        if let Some(OperatorSet::Fock(levels)) = self.operators {
            if !(2..=4096).contains(&levels) {
                return invalid(format!("Fock space size must be in [2, 4096], got {levels}"));
            }
        }
        Ok(())
    }

    /// Output sample times `k·dt_out ≤ t_max`; none when `t_max = 0`.
    pub fn sample_times(&self) -> Vec<f64> {
        match (self.t_max, self.dt_out) {
            (Some(t_max), Some(dt)) if t_max > 0.0 => {
                let n = (t_max / dt + 1e-9).floor() as usize;
                (0..=n).map(|k| k as f64 * dt).collect()
            }
            _ => Vec::new(),
        }
    }
}
