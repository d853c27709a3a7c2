//! Experiment configuration: JSON schema, strict parsing, validation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::profile::Profile;

/// What a run produces. `Sweep` is listed for completeness but takes its
/// grid from CLI range flags rather than from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Pde,
    Stationary,
    Validate,
    Sweep,
}

/// Initial macroscopic density profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    Constant { value: f64 },
    Linear { left: f64, right: f64 },
    Table { values: Vec<f64> },
}

impl InitialProfile {
    fn check_unit(v: f64, what: &str) -> Result<()> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::config(format!(
                "initial.{what} = {v} is outside [0, 1]"
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialProfile::Constant { value } => Self::check_unit(*value, "value"),
            InitialProfile::Linear { left, right } => {
                Self::check_unit(*left, "left")?;
                Self::check_unit(*right, "right")
            }
            InitialProfile::Table { values } => {
                if values.is_empty() {
                    return Err(Error::config("initial.values must be nonempty"));
                }
                for &v in values {
                    Self::check_unit(v, "values[..]")?;
                }
                Ok(())
            }
        }
    }

    /// Render on an m-cell grid. Constant and linear shapes are exact at
    /// any resolution; tables are linearly resampled from their own grid.
    pub fn profile(&self, m: usize) -> Result<Profile> {
        self.validate()?;
        Ok(match self {
            InitialProfile::Constant { value } => Profile::constant(m, *value),
            InitialProfile::Linear { left, right } => {
                Profile::from_fn(m, |q| left + (right - left) * q)
            }
            InitialProfile::Table { values } => {
                if values.len() == m {
                    Profile::new(values.clone())
                } else {
                    let base = Profile::new(values.clone());
                    Profile::from_fn(m, |q| base.interp(q).clamp(0.0, 1.0))
                }
            }
        })
    }
}

/// Either a seed count (streams 0..count-1) or an explicit stream list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(usize),
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn seeds(&self) -> Result<Vec<u64>> {
        let seeds = match self {
            SeedSpec::Count(k) => (0..*k as u64).collect::<Vec<_>>(),
            SeedSpec::List(list) => list.clone(),
        };
        if seeds.is_empty() {
            return Err(Error::config("seeds must name at least one stream"));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config(
                "seed list contains duplicates; every stream must be distinct",
            ));
        }
        Ok(seeds)
    }

    pub fn count(&self) -> usize {
        match self {
            SeedSpec::Count(k) => *k,
            SeedSpec::List(list) => list.len(),
        }
    }
}

/// Grid for the hydrodynamic solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSettings {
    /// Number of spatial cells.
    #[serde(default = "default_cells")]
    pub m: usize,
    /// Time step; omitted means the solver's stability-tuned default.
    #[serde(default)]
    pub dt: Option<f64>,
}

fn default_cells() -> usize {
    200
}

impl Default for PdeSettings {
    fn default() -> Self {
        PdeSettings {
            m: default_cells(),
            dt: None,
        }
    }
}

/// Pass/fail thresholds for `validate` runs. Only the configured ones are
/// enforced; `l1` always is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_l1")]
    pub l1: f64,
    #[serde(default)]
    pub linf: Option<f64>,
    #[serde(default)]
    pub boxcar: Option<f64>,
}

fn default_l1() -> f64 {
    0.05
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            l1: default_l1(),
            linf: None,
            boxcar: None,
        }
    }
}

/// One experiment, fully specified. Unknown keys are rejected so stale
/// configs fail loudly instead of silently running defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub params: ModelParams,
    pub initial: InitialProfile,
    /// Macroscopic observation times, strictly increasing.
    pub observe_times: Vec<f64>,
    pub seeds: SeedSpec,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub pde: PdeSettings,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_bins() -> usize {
    16
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.initial.validate()?;
        if self.observe_times.is_empty() {
            return Err(Error::config("observe_times must be nonempty"));
        }
        for &t in &self.observe_times {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::config(format!(
                    "observation time {t} must be finite and nonnegative"
                )));
            }
        }
        if self.observe_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "observe_times must be strictly increasing",
            ));
        }
        self.seeds.seeds()?;
        if self.bins == 0 || self.bins > self.params.n - 1 {
            return Err(Error::config(format!(
                "bins = {} must lie in [1, {}] for N = {}",
                self.bins,
                self.params.n - 1,
                self.params.n
            )));
        }
        if self.pde.m < 2 {
            return Err(Error::config(format!(
                "pde.m = {} needs at least two cells",
                self.pde.m
            )));
        }
        if let Some(dt) = self.pde.dt {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(Error::config(format!(
                    "pde.dt = {dt} must be positive and finite"
                )));
            }
        }
        if !(self.tolerances.l1 > 0.0) {
            return Err(Error::config(format!(
                "tolerances.l1 = {} must be positive",
                self.tolerances.l1
            )));
        }
        for (name, tol) in [
            ("linf", self.tolerances.linf),
            ("boxcar", self.tolerances.boxcar),
        ] {
            if let Some(v) = tol {
                if !(v > 0.0) {
                    return Err(Error::config(format!(
                        "tolerances.{name} = {v} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Time step the PDE solve will actually use.
    pub fn pde_dt(&self) -> f64 {
        self.pde
            .dt
            .unwrap_or_else(|| crate::pde::default_dt(self.pde.m))
    }
}

/// Parse and validate a JSON config file. Schema violations surface the
/// offending field through the serde error message.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}
