//! Sweep configuration, read from TOML.
//!
//! ```toml
//! model = "transverse-ising"
//! lengths = [8, 10, 12]
//! boundary = "obc"
//! grid = { start = 0.1, stop = 2.0, count = 39 }   # or grid = [0.25, 0.5]
//! alpha = 2.0
//! method = "transform"
//! seed = 1
//! output = "out/ti_obc"
//!
//! [solver]
//! tolerance = 1e-10
//! ```

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::duality::dual_parameter;
use crate::eigensolver::{SolverOptions, MAX_SOLVER_SITES};
use crate::error::{Error, Result};
use crate::magic::{ChainOptions, SreMethod, SreOptions, DEFAULT_TRANSFORM_SITES};
use crate::models::{Boundary, ModelKind, ModelSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParameterGrid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl ParameterGrid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            ParameterGrid::Values(ref v) => v.clone(),
            ParameterGrid::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![start],
                n => (0..n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }
}

impl std::str::FromStr for ParameterGrid {
    type Err = Error;

    /// `start:stop:count` or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse grid {s:?}; use start:stop:count or a,b,c"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            return Ok(ParameterGrid::Range {
                start: parts[0].trim().parse().map_err(|_| bad())?,
                stop: parts[1].trim().parse().map_err(|_| bad())?,
                count: parts[2].trim().parse().map_err(|_| bad())?,
            });
        }
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()
            .map(ParameterGrid::Values)
    }
}

fn default_alpha() -> f64 {
    2.0
}

fn default_method() -> SreMethod {
    SreMethod::Transform
}

fn default_transform_limit() -> usize {
    DEFAULT_TRANSFORM_SITES
}

fn default_output() -> String {
    "out/sweep".into()
}

fn default_boundary() -> Boundary {
    Boundary::Open
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelKind,
    pub lengths: Vec<usize>,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    pub grid: ParameterGrid,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_method")]
    pub method: SreMethod,
    #[serde(default)]
    pub seed: u64,
    /// Path prefix; `.csv` and `.gp` are appended.
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default = "default_transform_limit")]
    pub transform_limit: usize,
    #[serde(default = "default_true")]
    pub check_tie_break: bool,
    /// Free-text description carried into plot titles.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub chain: ChainOptions,
}

/// Values given on the command line; each one replaces the file's value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub lengths: Option<Vec<usize>>,
    pub boundary: Option<Boundary>,
    pub grid: Option<ParameterGrid>,
    pub alpha: Option<f64>,
    pub method: Option<SreMethod>,
    pub seed: Option<u64>,
    pub output: Option<String>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::merged(Some(text), &Overrides::default())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::merged(Some(&std::fs::read_to_string(path)?), &Overrides::default())
    }

    /// Parses `text` (if any), applies `over`, and deserializes the result.
    pub fn merged(text: Option<&str>, over: &Overrides) -> Result<Self> {
        let mut table: toml::Table = match text {
            Some(t) => t.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?,
            None => toml::Table::new(),
        };
        let mut set = |key: &str, v: toml::Value| {
            table.insert(key.to_string(), v);
        };
        if let Some(m) = over.model {
            set("model", m.name().into());
        }
        if let Some(ls) = &over.lengths {
            set("lengths", toml::Value::Array(ls.iter().map(|&l| (l as i64).into()).collect()));
        }
        if let Some(b) = over.boundary {
            set("boundary", b.to_string().into());
        }
        if let Some(g) = &over.grid {
            set("grid", toml::Value::try_from(g).map_err(|e| Error::Config(e.to_string()))?);
        }
        if let Some(a) = over.alpha {
            set("alpha", a.into());
        }
        if let Some(m) = over.method {
            set("method", m.name().into());
        }
        if let Some(s) = over.seed {
            let s = i64::try_from(s).map_err(|_| Error::Config(format!("seed {s} does not fit in a TOML integer")))?;
            set("seed", s.into());
        }
        if let Some(o) = &over.output {
            set("output", o.clone().into());
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.grid.values()
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            seed: self.seed,
            ..self.solver.clone()
        }
    }

    pub fn sre_options(&self) -> SreOptions {
        SreOptions {
            method: self.method,
            alpha: self.alpha,
            transform_limit: self.transform_limit,
            chain: ChainOptions {
                seed: self.seed,
                ..self.chain.clone()
            },
        }
    }

    /// Seed reported with each row.
    pub fn row_seed(&self) -> u64 {
        self.seed
    }

    pub fn csv_path(&self) -> PathBuf {
        PathBuf::from(format!("{}.csv", self.output))
    }

    pub fn plot_path(&self) -> PathBuf {
        PathBuf::from(format!("{}.gp", self.output))
    }

    pub fn convergence_path(&self) -> PathBuf {
        PathBuf::from(format!("{}_convergence.csv", self.output))
    }

    /// Checks every point of the sweep before anything is solved.
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::Config("lengths must not be empty".into()));
        }
        let params = self.parameters();
        if params.is_empty() {
            return Err(Error::Config("parameter grid is empty".into()));
        }
        if self.output.trim().is_empty() {
            return Err(Error::Config("output prefix must not be empty".into()));
        }
        self.solver.validate()?;
        let sre = self.sre_options();
        let mut seen = std::collections::BTreeSet::new();
        for &l in &self.lengths {
            if !seen.insert(l) {
                return Err(Error::Config(format!("length {l} listed twice")));
            }
            if l > MAX_SOLVER_SITES {
                return Err(Error::TooManySites {
                    what: "eigensolver",
                    length: l,
                    limit: MAX_SOLVER_SITES,
                });
            }
            sre.validate_for(l)?;
            for &p in &params {
                ModelSpec::new(self.model, l, p, self.boundary)?;
            }
        }
        Ok(())
    }

    /// As [`validate`](Self::validate), and also requires every parameter to
    /// lie on the primal side of the duality.
    pub fn validate_dual(&self) -> Result<()> {
        self.validate()?;
        for p in self.parameters() {
            let primal = match self.model {
                ModelKind::DimerizedXx => p > 0.0 && p <= 1.0,
                ModelKind::ClusterIsing | ModelKind::TransverseIsing => p > 0.0 && p < 1.0,
            };
            if !primal {
                return Err(Error::Config(format!(
                    "dual sweeps take {} on the primal side only, got {p}",
                    self.model.parameter_name()
                )));
            }
            dual_parameter(self.model, p)?;
        }
        Ok(())
    }
}
