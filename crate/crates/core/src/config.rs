//! Experiment configuration: a flat `key = value` text format.
//!
//! Blank lines and `#` comments are ignored. Keys are case-sensitive and
//! each may appear once. Lists (`N`, `snapshot_times`) are comma-separated.
//! Lengths accept a `pi` suffix (`2pi`, `pi`, `0.5pi`).
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `model` | `TFAC_VC`, `TFCH` or `TFSH` | required |
//! | `alpha` | fractional order in (0, 1] | required |
//! | `sigma` | regularity of the manufactured solution | 2 |
//! | `gamma` | grading exponent of `graded` meshes | 1 |
//! | `N` | step count(s) | 64 |
//! | `grid` | `n` or `nx x ny` | 64 |
//! | `Lx`, `Ly` | box lengths | 2pi |
//! | `T` | final time | 1 |
//! | `M`, `epsilon`, `g`, `delta`, `S` | model parameters | 0.01, 0.25, 1, 0.2, 2 |
//! | `lambda`, `tau_min`, `tau_max` | adaptive controller | 100, 1e-3, 0.5 |
//! | `mesh` | `uniform`, `graded` or `adaptive` | uniform |
//! | `tol` | linear solver tolerance | 1e-12 |
//! | `seed` | seed of random initial data | 0 |
//! | `init` | `random`, `pattern` or `profile` | random |
//! | `snapshot_times` | times to write fields at | none |
//! | `out_dir` | output directory | out |

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::initial::InitialData;
use crate::mesh::{AdaptiveController, AdaptiveParams, TemporalMesh};
use crate::models::{ModelKind, ModelParams, SolverConfig, StepPlan};
use crate::spectral::PeriodicGrid;

pub const KEYS: [&str; 24] = [
    "model",
    "alpha",
    "sigma",
    "gamma",
    "N",
    "grid",
    "Lx",
    "Ly",
    "T",
    "M",
    "epsilon",
    "g",
    "delta",
    "S",
    "lambda",
    "tau_min",
    "tau_max",
    "mesh",
    "tol",
    "seed",
    "init",
    "snapshot_times",
    "out_dir",
    "sampling",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("line {line}: key '{key}' given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn value_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    #[default]
    Uniform,
    Graded,
    Adaptive,
}

impl MeshKind {
    pub fn name(self) -> &'static str {
        match self {
            MeshKind::Uniform => "uniform",
            MeshKind::Graded => "graded",
            MeshKind::Adaptive => "adaptive",
        }
    }
}

impl FromStr for MeshKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(MeshKind::Uniform),
            "graded" => Ok(MeshKind::Graded),
            "adaptive" => Ok(MeshKind::Adaptive),
            other => Err(format!("unknown mesh '{other}' (expected uniform, graded or adaptive)")),
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A parsed and typed experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Option<ModelKind>,
    pub alpha: Option<f64>,
    pub sigma: f64,
    pub gamma: f64,
    pub steps: Vec<usize>,
    pub grid: (usize, usize),
    pub lx: f64,
    pub ly: f64,
    pub horizon: f64,
    pub mobility: f64,
    pub epsilon: f64,
    pub g: f64,
    pub delta: f64,
    pub stabilizer: f64,
    pub lambda: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub mesh: MeshKind,
    pub tol: f64,
    pub seed: u64,
    pub init: InitialData,
    pub snapshot_times: Vec<f64>,
    pub out_dir: PathBuf,
    pub interval_average: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let base = ModelParams::new(ModelKind::AllenCahn, 1.0);
        Self {
            model: None,
            alpha: None,
            sigma: 2.0,
            gamma: 1.0,
            steps: vec![64],
            grid: (64, 64),
            lx: 2.0 * PI,
            ly: 2.0 * PI,
            horizon: 1.0,
            mobility: base.mobility,
            epsilon: base.epsilon,
            g: base.g,
            delta: base.delta,
            stabilizer: base.stabilizer,
            lambda: 100.0,
            tau_min: 1e-3,
            tau_max: 0.5,
            mesh: MeshKind::Uniform,
            tol: SolverConfig::default().tolerance,
            seed: 0,
            init: InitialData::Random,
            snapshot_times: Vec::new(),
            out_dir: PathBuf::from("out"),
            interval_average: false,
        }
    }
}

fn parse_number(key: &str, raw: &str) -> Result<f64, ConfigError> {
    let s = raw.trim();
    let (body, factor) = match s.strip_suffix("pi") {
        Some("") => ("1", PI),
        Some(head) => (head.trim_end_matches('*').trim(), PI),
        None => (s, 1.0),
    };
    let v: f64 = body
        .parse()
        .map_err(|_| value_error(key, format!("'{raw}' is not a number")))?;
    let v = v * factor;
    if !v.is_finite() {
        return Err(value_error(key, format!("'{raw}' is not finite")));
    }
    Ok(v)
}

fn parse_count(key: &str, raw: &str) -> Result<usize, ConfigError> {
    raw.trim()
        .parse()
        .map_err(|_| value_error(key, format!("'{raw}' is not a nonnegative integer")))
}

fn parse_list<T>(key: &str, raw: &str, item: impl Fn(&str, &str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',').map(|part| item(key, part)).collect()
}

fn parse_grid(raw: &str) -> Result<(usize, usize), ConfigError> {
    let lower = raw.trim().to_ascii_lowercase();
    let mut parts = lower.split(['x', '×']).map(str::trim);
    let nx = parse_count("grid", parts.next().unwrap_or(""))?;
    let ny = match parts.next() {
        Some(p) => parse_count("grid", p)?,
        None => nx,
    };
    if parts.next().is_some() {
        return Err(value_error("grid", format!("'{raw}' should be `n` or `nx x ny`")));
    }
    Ok((nx, ny))
}

fn format_list<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parses config text. Unknown keys and repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw_line.trim().to_string(),
                });
            };
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate {
                    line: i + 1,
                    key: key.to_string(),
                });
            }
            cfg.set(key, value.trim())?;
            seen.push(key.to_string());
        }
        Ok(cfg)
    }

    /// Assigns one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let num = |v: &str| parse_number(key, v);
        match key {
            "model" => {
                self.model = Some(value.parse().map_err(|e: crate::models::ModelError| value_error(key, e.to_string()))?)
            }
            "alpha" => self.alpha = Some(num(value)?),
            "sigma" => self.sigma = num(value)?,
            "gamma" => self.gamma = num(value)?,
            "N" => self.steps = parse_list(key, value, parse_count)?,
            "grid" => self.grid = parse_grid(value)?,
            "Lx" => self.lx = num(value)?,
            "Ly" => self.ly = num(value)?,
            "T" => self.horizon = num(value)?,
            "M" => self.mobility = num(value)?,
            "epsilon" => self.epsilon = num(value)?,
            "g" => self.g = num(value)?,
            "delta" => self.delta = num(value)?,
            "S" => self.stabilizer = num(value)?,
            "lambda" => self.lambda = num(value)?,
            "tau_min" => self.tau_min = num(value)?,
            "tau_max" => self.tau_max = num(value)?,
            "mesh" => self.mesh = value.parse().map_err(|e: String| value_error(key, e))?,
            "tol" => self.tol = num(value)?,
            "seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| value_error(key, format!("'{value}' is not an unsigned integer")))?
            }
            "init" => self.init = value.parse().map_err(|e: String| value_error(key, e))?,
            "snapshot_times" => self.snapshot_times = parse_list(key, value, parse_number)?,
            "out_dir" => {
                if value.is_empty() {
                    return Err(value_error(key, "must not be empty"));
                }
                self.out_dir = PathBuf::from(value)
            }
            "sampling" => {
                self.interval_average = match value.trim().to_ascii_lowercase().as_str() {
                    "midpoint" => false,
                    "average" => true,
                    other => {
                        return Err(value_error(key, format!("unknown sampling '{other}' (expected midpoint or average)")))
                    }
                }
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn model_kind(&self) -> Result<ModelKind, ConfigError> {
        self.model.ok_or(ConfigError::Missing("model"))
    }

    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        let kind = self.model_kind()?;
        let alpha = self.alpha.ok_or(ConfigError::Missing("alpha"))?;
        let params = ModelParams {
            kind,
            alpha,
            mobility: self.mobility,
            epsilon: self.epsilon,
            g: self.g,
            delta: self.delta,
            stabilizer: self.stabilizer,
        };
        params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(params)
    }

    pub fn solver(&self) -> Result<SolverConfig, ConfigError> {
        let cfg = SolverConfig {
            tolerance: self.tol,
            ..SolverConfig::default()
        };
        cfg.validate().map_err(|m| value_error("tol", m))?;
        Ok(cfg)
    }

    pub fn build_grid(&self) -> Result<Arc<PeriodicGrid>, ConfigError> {
        PeriodicGrid::new(self.grid.0, self.grid.1, self.lx, self.ly).map_err(|e| value_error("grid", e.to_string()))
    }

    /// Grading exponent of a fixed mesh (`uniform` is `γ = 1`).
    pub fn fixed_grading(&self) -> Result<f64, ConfigError> {
        match self.mesh {
            MeshKind::Uniform => Ok(1.0),
            MeshKind::Graded => Ok(self.gamma),
            MeshKind::Adaptive => Err(ConfigError::Invalid(
                "this command needs a prescribed mesh (uniform or graded)".into(),
            )),
        }
    }

    /// The time plan of an evolution run, which takes exactly one `N`.
    pub fn step_plan(&self) -> Result<StepPlan, ConfigError> {
        let params = self.model_params()?;
        let mesh_err = |e: crate::mesh::MeshError| ConfigError::Invalid(e.to_string());
        match self.mesh {
            MeshKind::Adaptive => {
                let ap = AdaptiveParams {
                    lambda: self.lambda,
                    tau_min: self.tau_min,
                    tau_max: self.tau_max,
                    kernel_order: params.kernel_order(),
                };
                Ok(StepPlan::Adaptive(AdaptiveController::new(ap, self.horizon).map_err(mesh_err)?))
            }
            _ => {
                let steps = match self.steps.as_slice() {
                    [n] => *n,
                    _ => {
                        return Err(value_error(
                            "N",
                            format!("an evolution run takes one step count, got {}", self.steps.len()),
                        ))
                    }
                };
                let mesh = if steps == 0 {
                    TemporalMesh::from_nodes(vec![0.0])
                } else {
                    TemporalMesh::graded(self.horizon, steps, self.fixed_grading()?)
                }
                .map_err(mesh_err)?;
                Ok(StepPlan::Fixed(mesh))
            }
        }
    }

    /// Checks every value that does not depend on the subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model_params()?;
        self.solver()?;
        self.build_grid()?;
        let positive = |key: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(value_error(key, format!("must be positive, got {v}")))
            }
        };
        positive("sigma", self.sigma)?;
        if !(self.gamma >= 1.0) {
            return Err(value_error("gamma", format!("must be at least 1, got {}", self.gamma)));
        }
        if !(self.horizon >= 0.0) {
            return Err(value_error("T", format!("must be nonnegative, got {}", self.horizon)));
        }
        if self.steps.is_empty() {
            return Err(value_error("N", "needs at least one step count"));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0)) {
            return Err(value_error("snapshot_times", format!("times must be nonnegative, got {t}")));
        }
        Ok(())
    }

    /// Canonical `key = value` pairs for every key, in schema order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        // `{:?}` keeps every digit and prints 1e-12 rather than 0.000000000001
        let num = |v: f64| format!("{v:?}");
        KEYS.iter()
            .map(|&k| {
                let v = match k {
                    "model" => opt(self.model.map(|m| m.to_string())),
                    "alpha" => opt(self.alpha.map(num)),
                    "sigma" => num(self.sigma),
                    "gamma" => num(self.gamma),
                    "N" => format_list(&self.steps),
                    "grid" => format!("{}x{}", self.grid.0, self.grid.1),
                    "Lx" => num(self.lx),
                    "Ly" => num(self.ly),
                    "T" => num(self.horizon),
                    "M" => num(self.mobility),
                    "epsilon" => num(self.epsilon),
                    "g" => num(self.g),
                    "delta" => num(self.delta),
                    "S" => num(self.stabilizer),
                    "lambda" => num(self.lambda),
                    "tau_min" => num(self.tau_min),
                    "tau_max" => num(self.tau_max),
                    "mesh" => self.mesh.to_string(),
                    "tol" => num(self.tol),
                    "seed" => self.seed.to_string(),
                    "init" => self.init.to_string(),
                    "snapshot_times" => self.snapshot_times.iter().map(|&t| num(t)).collect::<Vec<_>>().join(","),
                    "out_dir" => self.out_dir.display().to_string(),
                    "sampling" => if self.interval_average { "average" } else { "midpoint" }.to_string(),
                    _ => unreachable!("every schema key is listed"),
                };
                (k, v)
            })
            .collect()
    }

    /// Config text that parses back to an equal configuration.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
