//! Experiment configuration: one JSON file with `target`, `sampler`, `run`
//! and `output` sections.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub sampler: SamplerSpec,
    pub run: RunSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// `N(0, I_d)`.
    StandardGaussian { dim: usize },
    /// `N(0, diag(variances))`.
    AnisotropicGaussian { variances: Vec<f64> },
    /// `U(x, y) = scale · ((a − x)² + b (y − x²)²)`.
    #[serde(alias = "banana")]
    Rosenbrock {
        #[serde(default = "default_a")]
        a: f64,
        #[serde(default = "default_b")]
        b: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// `e^{−Φ} dμ₀` with `μ₀ = N(0, diag(eigenvalues))`.
    Hilbert { eigenvalues: EigenSpec, phi: PhiSpec },
}

fn default_a() -> f64 {
    1.0
}

fn default_b() -> f64 {
    100.0
}

fn default_scale() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EigenSpec {
    Values(Vec<f64>),
    /// `λᵢ = c · i^{−p}`, `i = 1..dim`.
    PowerLaw { c: f64, p: f64, dim: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    QuarticBounded,
    Linear { a: Vec<f64> },
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerSpec {
    Rwmc {
        sigma: f64,
    },
    Mala {
        delta: f64,
    },
    Hmc {
        delta: f64,
        n_steps: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass_diagonal: Option<Vec<f64>>,
    },
    RelativisticHmc {
        m: f64,
        c: f64,
        delta: f64,
        n_steps: usize,
    },
    /// Diagonal metric `mᵢ(q) = a + b qᵢ²`.
    Rmhmc {
        delta: f64,
        n_steps: usize,
        a: f64,
        b: f64,
    },
    /// Leapfrog driven by `−force_scale · ∇U`.
    SurrogateHmc {
        delta: f64,
        n_steps: usize,
        #[serde(default = "default_force_scale")]
        force_scale: f64,
    },
    Pcn {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<f64>,
    },
    InfMala {
        delta: f64,
    },
    InfHmc {
        delta1: f64,
        delta2: f64,
        n_steps: usize,
    },
    /// Force `force_scale · C∇Φ`.
    GenLangevin {
        delta: f64,
        #[serde(default = "default_force_scale")]
        force_scale: f64,
    },
}

fn default_force_scale() -> f64 {
    1.0
}

impl SamplerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerSpec::Rwmc { .. } => "rwmc",
            SamplerSpec::Mala { .. } => "mala",
            SamplerSpec::Hmc { .. } => "hmc",
            SamplerSpec::RelativisticHmc { .. } => "relativistic_hmc",
            SamplerSpec::Rmhmc { .. } => "rmhmc",
            SamplerSpec::SurrogateHmc { .. } => "surrogate_hmc",
            SamplerSpec::Pcn { .. } => "pcn",
            SamplerSpec::InfMala { .. } => "inf_mala",
            SamplerSpec::InfHmc { .. } => "inf_hmc",
            SamplerSpec::GenLangevin { .. } => "gen_langevin",
        }
    }

    pub fn needs_hilbert_target(&self) -> bool {
        matches!(
            self,
            SamplerSpec::Pcn { .. }
                | SamplerSpec::InfMala { .. }
                | SamplerSpec::InfHmc { .. }
                | SamplerSpec::GenLangevin { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub n_steps: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "default_chains")]
    pub n_chains: usize,
    pub seed: u64,
    /// Starting state; the origin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

fn default_chains() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Keep every `thin`-th step in the CSV files.
    #[serde(default = "default_thin")]
    pub thin: usize,
}

fn default_thin() -> usize {
    1
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, thin: 1 }
    }
}

/// A configuration problem, with its location in the source file when known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            column: None,
            message: message.into(),
        }
    }

    pub fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A parsed config together with its source text, used to attach line
/// numbers to validation errors.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
}

impl LoadedConfig {
    /// Line of `"key"` inside `section` (or of the section itself).
    pub fn line_of(&self, section: &str, key: Option<&str>) -> Option<usize> {
        let start = self.source.find(&format!("\"{section}\""))?;
        let pos = match key {
            Some(k) => start + self.source[start..].find(&format!("\"{k}\""))?,
            None => start,
        };
        Some(self.source[..pos].matches('\n').count() + 1)
    }

    pub fn error(&self, section: &str, key: Option<&str>, message: impl Into<String>) -> ConfigError {
        let line = self.line_of(section, key).or_else(|| self.line_of(section, None));
        ConfigError::at(line, message)
    }
}

pub fn parse(source: &str) -> Result<LoadedConfig, ConfigError> {
    let config: ExperimentConfig = serde_json::from_str(source).map_err(|e| ConfigError {
        line: Some(e.line()),
        column: Some(e.column()),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    })?;
    Ok(LoadedConfig {
        config,
        source: source.to_string(),
    })
}

pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    parse(&source)
}
