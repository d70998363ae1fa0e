//! Run configuration, read from TOML.
//!
//! ```toml
//! A = "36/11"
//! degree = 40
//! epsilon = "1e-10"
//! precision_bits = 256
//! trace_penalty = "1e-10"
//! solver_command = "python3 tools/sdpa_solve.py {input} {output}"
//!
//! [paths]
//! output_dir = "out"
//!
//! [quadrature]
//! target_width = 1e-10
//! max_subdivisions = 1000000
//! tail_tolerance = 1e-25
//! ```

use std::path::{Path, PathBuf};

use rug::Rational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::candidate::QuadratureOptions;
use crate::rigor::{parse_exact_rational, Precision};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {detail}")]
    Read { path: String, detail: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

pub const DEFAULT_SOLVER_COMMAND: &str = "python3 tools/sdpa_solve.py {input} {output}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "A")]
    pub a: String,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: String,
    #[serde(default = "default_precision")]
    pub precision_bits: u32,
    #[serde(default = "default_penalty")]
    pub trace_penalty: String,
    #[serde(default = "default_solver")]
    pub solver_command: String,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Falls back to `CPLUS_WORKSPACE`, then the current directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workspace: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            workspace: None,
            output_dir: default_output_dir(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub target_width: f64,
    pub max_subdivisions: usize,
    pub tail_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadratureOptions::default();
        QuadratureConfig {
            target_width: q.target_width,
            max_subdivisions: q.max_subdivisions,
            tail_tolerance: q.tail_tolerance,
        }
    }
}

fn default_degree() -> usize {
    40
}
fn default_epsilon() -> String {
    "1e-20".into()
}
fn default_precision() -> u32 {
    Precision::DEFAULT_BITS
}
fn default_penalty() -> String {
    "1e-10".into()
}
fn default_solver() -> String {
    DEFAULT_SOLVER_COMMAND.into()
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn new(a: &str) -> Self {
        RunConfig {
            a: a.to_string(),
            degree: default_degree(),
            epsilon: default_epsilon(),
            precision_bits: default_precision(),
            trace_penalty: default_penalty(),
            solver_command: default_solver(),
            paths: Paths::default(),
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).unwrap_or_default();
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn validate(&self, env_workspace: Option<&Path>) -> Result<Validated, ConfigError> {
        let invalid = |m: String| ConfigError::Invalid(m);
        let a = parse_exact_rational(&self.a).map_err(|e| invalid(format!("A: {e}")))?;
        if a < 1 {
            return Err(invalid(format!("A = {a} must be at least 1")));
        }
        if self.degree < 2 {
            return Err(invalid(format!("degree {} must be at least 2", self.degree)));
        }
        let epsilon = parse_exact_rational(&self.epsilon).map_err(|e| invalid(format!("epsilon: {e}")))?;
        if epsilon < 0 {
            return Err(invalid("epsilon must be nonnegative".into()));
        }
        let trace_penalty =
            parse_exact_rational(&self.trace_penalty).map_err(|e| invalid(format!("trace_penalty: {e}")))?;
        if trace_penalty < 0 {
            return Err(invalid("trace_penalty must be nonnegative".into()));
        }
        let prec = Precision::new(self.precision_bits).map_err(|e| invalid(e.to_string()))?;
        if !self.solver_command.contains("{input}") || !self.solver_command.contains("{output}") {
            return Err(invalid("solver_command needs {input} and {output} placeholders".into()));
        }
        let q = &self.quadrature;
        if !(q.target_width > 0.0 && q.tail_tolerance > 0.0) || q.max_subdivisions == 0 {
            return Err(invalid("quadrature tolerances and budget must be positive".into()));
        }
        let workspace = self
            .paths
            .workspace
            .clone()
            .or_else(|| env_workspace.map(Path::to_path_buf))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Validated {
            config: self.clone(),
            a,
            epsilon,
            trace_penalty,
            prec,
            workspace,
            hash: self.hash(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Validated {
    pub config: RunConfig,
    pub a: Rational,
    pub epsilon: Rational,
    pub trace_penalty: Rational,
    pub prec: Precision,
    pub workspace: PathBuf,
    pub hash: String,
}

impl Validated {
    pub fn output_dir(&self) -> PathBuf {
        self.workspace.join(&self.config.paths.output_dir)
    }

    pub fn quadrature(&self) -> QuadratureOptions {
        let q = &self.config.quadrature;
        QuadratureOptions {
            target_width: q.target_width,
            max_subdivisions: q.max_subdivisions,
            tail_tolerance: q.tail_tolerance,
            ..QuadratureOptions::default()
        }
    }
}
