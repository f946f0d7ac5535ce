//! TOML experiment manifests.
//!
//! Top-level keys set defaults; each `[[runs]]` entry overrides them and
//! becomes one check. Without `[[runs]]` the top level is a single check.
//!
//! ```toml
//! identity = "main-theorem"
//! exponent = "brownian:a=-0.15,sigma=1"
//! method = "paths"
//! n = 10000
//! seed = 7
//!
//! [path]
//! dt = 1e-3
//!
//! [[runs]]
//! rho = 0.3
//! ```
//!
//! `exponent` may also be a table with quadruplet entries (`killing`,
//! `drift`, `gaussian`, `density_plus`, `density_minus`, `barrier_plus`,
//! `barrier_minus`), densities being expressions in `y`.

use std::path::PathBuf;

use levyfac_core::paths::PathConfig;
use serde::{Deserialize, Serialize};

use crate::harness::{CheckConfig, Exponent, Method, PathSettings, IDENTITIES};
use crate::spec::{QuadrupletSpec, Spec, SpecError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("config: {0}")]
    Invalid(String),
    #[error("config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentConfig {
    Builtin(String),
    Quadruplet(QuadrupletSpec),
}

impl ExponentConfig {
    pub fn build(&self) -> Result<Exponent, ConfigError> {
        match self {
            ExponentConfig::Builtin(s) => {
                let spec = Spec::parse(s)?;
                Ok(Exponent { psi: spec.exponent()?, key: spec.canonical() })
            }
            ExponentConfig::Quadruplet(q) => Ok(Exponent {
                psi: q.build()?,
                key: format!("quadruplet:{}", serde_json::to_string(q).expect("quadruplet serializes")),
            }),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFields {
    pub dt: Option<f64>,
    pub stop_epsilon: Option<f64>,
    pub max_steps: Option<u64>,
    pub kill_rate: Option<f64>,
    /// Small-jump cutoff of the compound Poisson approximation.
    pub jump_epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFields {
    pub dir: Option<PathBuf>,
    /// Print the JSON reports to stdout.
    #[serde(default)]
    pub json: bool,
}

/// Fields a `[[runs]]` entry may override.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFields {
    pub identity: Option<String>,
    pub exponent: Option<ExponentConfig>,
    pub method: Option<String>,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub nsteps: Option<u64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub gate: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub identity: Option<String>,
    pub exponent: Option<ExponentConfig>,
    pub method: Option<String>,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub nsteps: Option<u64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub gate: Option<bool>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub path: PathFields,
    #[serde(default)]
    pub output: OutputFields,
    #[serde(default)]
    pub runs: Vec<RunFields>,
}

pub fn parse_method(s: &str) -> Result<Method, ConfigError> {
    Method::parse(s).ok_or_else(|| ConfigError::Invalid(format!("unknown method `{s}`; expected paths, oracle or direct")))
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    fn base(&self) -> RunFields {
        RunFields {
            identity: self.identity.clone(),
            exponent: self.exponent.clone(),
            method: self.method.clone(),
            alpha: self.alpha,
            rho: self.rho,
            a: self.a,
            b: self.b,
            nsteps: self.nsteps,
            n: self.n,
            seed: self.seed,
            gate: self.gate,
        }
    }

    pub fn path_settings(&self) -> Result<PathSettings, ConfigError> {
        let d = PathSettings::default();
        let p = &self.path;
        let config = PathConfig {
            dt: p.dt.unwrap_or(d.config.dt),
            stop_epsilon: p.stop_epsilon.unwrap_or(d.config.stop_epsilon),
            max_steps: p.max_steps.unwrap_or(d.config.max_steps),
            kill_rate: p.kill_rate.unwrap_or(d.config.kill_rate),
        };
        config.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let epsilon = p.jump_epsilon.unwrap_or(d.epsilon);
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(ConfigError::Invalid(format!("jump_epsilon must lie in (0, 1] (got {epsilon})")));
        }
        Ok(PathSettings { config, epsilon })
    }

    /// One check per run, top-level values filling the gaps.
    pub fn jobs(&self) -> Result<Vec<CheckConfig>, ConfigError> {
        let base = self.base();
        let runs = if self.runs.is_empty() { vec![RunFields::default()] } else { self.runs.clone() };
        let paths = self.path_settings()?;
        runs.iter().map(|r| merge(r, &base, paths)).collect()
    }
}

fn merge(r: &RunFields, base: &RunFields, paths: PathSettings) -> Result<CheckConfig, ConfigError> {
    let identity = r
        .identity
        .clone()
        .or_else(|| base.identity.clone())
        .ok_or_else(|| ConfigError::Invalid("missing `identity`".into()))?;
    if !IDENTITIES.contains(&identity.as_str()) {
        return Err(ConfigError::Invalid(format!("unknown identity `{identity}`; expected one of {}", IDENTITIES.join(", "))));
    }
    let mut c = CheckConfig::new(&identity);
    if let Some(e) = r.exponent.as_ref().or(base.exponent.as_ref()) {
        c.exponent = Some(e.build()?);
    }
    if let Some(m) = r.method.as_ref().or(base.method.as_ref()) {
        c.method = parse_method(m)?;
    }
    c.alpha = r.alpha.or(base.alpha);
    c.rho = r.rho.or(base.rho);
    c.a = r.a.or(base.a);
    c.b = r.b.or(base.b);
    if let Some(v) = r.nsteps.or(base.nsteps) {
        c.n_steps = v;
    }
    if let Some(v) = r.n.or(base.n) {
        c.n = v;
    }
    if let Some(v) = r.seed.or(base.seed) {
        c.seed = v;
    }
    c.gate = r.gate.or(base.gate).unwrap_or(false);
    c.paths = paths;
    Ok(c)
}
