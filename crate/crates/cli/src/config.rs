use std::path::PathBuf;

use latstretch::curves::{CurveSpec, Exponent};
use latstretch::experiments::{Objective, RGrid};
use latstretch::spectral::Problem;
use latstretch::{Curve, Quadrant};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Optimal stretch of the circle over the default grid.
    Figure2,
    /// The same for the diamond.
    Figure5,
    Scan,
    Counterexample,
    Audit,
    EigenAsymptotics,
    Cluster,
    Oscillator,
}

impl Experiment {
    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Figure2 | Experiment::Figure5 | Experiment::Scan => "scan",
            Experiment::Counterexample => "counterexample",
            Experiment::Audit => "audit",
            Experiment::EigenAsymptotics => "eigen",
            Experiment::Cluster => "cluster",
            Experiment::Oscillator => "oscillator",
        }
    }
}

/// One run, as read from `--config` or assembled from flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub p: Option<Exponent>,
    /// Custom curve for `counterexample`; overrides `p`.
    #[serde(default)]
    pub curve: Option<CurveSpec>,
    #[serde(default)]
    pub r_grid: Option<RGrid>,
    /// Explicit radii; override `r_grid`.
    #[serde(default)]
    pub r: Option<Vec<f64>>,
    #[serde(default)]
    pub s: Option<Vec<f64>>,
    #[serde(default)]
    pub objective: Option<Objective>,
    #[serde(default)]
    pub quadrant: Option<Quadrant>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_max_m")]
    pub max_m: u64,
    #[serde(default)]
    pub n: Option<Vec<u64>>,
    #[serde(default)]
    pub problem: Option<Problem>,
    #[serde(default = "default_max_n")]
    pub max_n: u64,
}

fn default_seed() -> u64 {
    42
}

fn default_draws() -> usize {
    1000
}

fn default_max_m() -> u64 {
    1000
}

fn default_max_n() -> u64 {
    50
}

pub const DEFAULT_EIGEN_INDICES: [u64; 4] = [100, 1_000, 10_000, 100_000];

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig {
            experiment,
            p: None,
            curve: None,
            r_grid: None,
            r: None,
            s: None,
            objective: None,
            quadrant: None,
            output_path: None,
            parallelism: 0,
            seed: default_seed(),
            draws: default_draws(),
            max_m: default_max_m(),
            n: None,
            problem: None,
            max_n: default_max_n(),
        }
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn exponent(&self) -> Result<f64, CliError> {
        let default = match self.experiment {
            Experiment::Figure5 => 1.0,
            _ => 2.0,
        };
        let p = match &self.p {
            Some(p) => p.value().map_err(CliError::usage)?,
            None => default,
        };
        if p.is_nan() || p < 1.0 {
            return Err(CliError::Usage(format!("p must be at least 1, got {p}")));
        }
        Ok(p)
    }

    pub fn curve(&self) -> Result<Curve, CliError> {
        match &self.curve {
            Some(spec) => Curve::from_spec(spec).map_err(CliError::usage),
            None => Curve::lame(self.exponent()?).map_err(CliError::usage),
        }
    }

    pub fn radii(&self) -> Result<Vec<f64>, CliError> {
        if let Some(r) = &self.r {
            if r.is_empty() {
                return Err(CliError::Usage("the radius list is empty".into()));
            }
            if let Some(bad) = r.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                return Err(CliError::Usage(format!(
                    "radii must be positive, got {bad}"
                )));
            }
            return Ok(r.clone());
        }
        let grid = self.r_grid.unwrap_or_default();
        grid.validate().map_err(CliError::usage)?;
        Ok(grid.values())
    }

    pub fn indices(&self) -> Result<Vec<u64>, CliError> {
        let n = match (&self.n, self.experiment) {
            (Some(n), _) => n.clone(),
            (None, Experiment::Oscillator) => (1..=self.max_n).collect(),
            (None, _) => DEFAULT_EIGEN_INDICES.to_vec(),
        };
        if n.is_empty() {
            return Err(CliError::Usage("the index list is empty".into()));
        }
        if n.contains(&0) {
            return Err(CliError::Usage("eigenvalue indices start at 1".into()));
        }
        Ok(n)
    }
}
