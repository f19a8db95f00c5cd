use std::path::{Path, PathBuf};

use hypercyclic::{GridSpec, Scalar};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MAX_M: usize = 8;
pub const MAX_TARGETS: usize = 10_000;

/// Fully resolved run parameters. Serialised into every report (minus the
/// output path, so reports do not depend on where they were written).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub m: usize,
    pub lambda: Scalar,
    pub grid_dim: usize,
    pub grid_coords: Vec<Scalar>,
    pub target_count: usize,
    /// Tolerances are εₖ = 2^(−(k + shift)).
    pub tolerance_shift: i64,
    pub horizon_override: Option<usize>,
    pub seed: u64,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let half = Scalar::ratio(1, 2);
        RunConfig {
            m: 2,
            lambda: Scalar::from_integer(2),
            grid_dim: 4,
            grid_coords: vec![Scalar::zero(), half.clone(), -half, Scalar::one(), -Scalar::one()],
            target_count: 10,
            tolerance_shift: 0,
            horizon_override: None,
            seed: 0,
            output_path: None,
        }
    }
}

/// Optional overrides, as given on the command line or in a config file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub m: Option<usize>,
    pub lambda: Option<String>,
    pub grid_dim: Option<usize>,
    pub grid_coords: Option<Vec<String>>,
    pub targets: Option<usize>,
    pub tolerance_shift: Option<i64>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ConfigOverrides {
    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn apply(self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let parse = |s: &str| s.parse::<Scalar>().map_err(|e| CliError::Config(e.to_string()));
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(l) = self.lambda {
            cfg.lambda = parse(&l)?;
        }
        if let Some(d) = self.grid_dim {
            cfg.grid_dim = d;
        }
        if let Some(cs) = self.grid_coords {
            cfg.grid_coords = cs.iter().map(|c| parse(c)).collect::<Result<_, _>>()?;
        }
        if let Some(t) = self.targets {
            cfg.target_count = t;
        }
        if let Some(s) = self.tolerance_shift {
            cfg.tolerance_shift = s;
        }
        if self.horizon.is_some() {
            cfg.horizon_override = self.horizon;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.out.is_some() {
            cfg.output_path = self.out;
        }
        Ok(())
    }
}

impl RunConfig {
    /// Defaults, then flags, then the config file (which wins).
    pub fn resolve(flags: ConfigOverrides, file: Option<ConfigOverrides>) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        flags.apply(&mut cfg)?;
        if let Some(file) = file {
            file.apply(&mut cfg)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=MAX_M).contains(&self.m) {
            return Err(CliError::Config(format!("m must be in 1..={MAX_M}, got {}", self.m)));
        }
        if !(1..=MAX_TARGETS).contains(&self.target_count) {
            return Err(CliError::Config(format!("targets must be in 1..={MAX_TARGETS}, got {}", self.target_count)));
        }
        if self.lambda.abs() < Scalar::from_integer(2) {
            return Err(CliError::Config(format!("|lambda| must be at least 2, got {}", self.lambda)));
        }
        if !(-64..=64).contains(&self.tolerance_shift) {
            return Err(CliError::Config("tolerance shift must be in -64..=64".into()));
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.grid_dim, self.grid_coords.clone()).map_err(|e| CliError::Config(e.to_string()))
    }
}
