//! Experiment configuration, read from TOML.
//!
//! ```toml
//! potential = "standard_quartic"   # or bounded_tail, flat_wells
//! seed = 42
//! k_values = [0.05, 1.2]
//! epsilon_values = [0.05, 0.02]
//!
//! [domain]
//! a = 0.0
//! b = 1.0
//! n = 2001
//!
//! [boundary]                      # optional, both ends free by default
//! left = { kind = "value", value = -1.0 }
//! right = { kind = "value", value = 1.0 }
//!
//! [solver]                        # optional, every key has a default
//! max_iterations = 20000
//! gradient_tolerance = 1e-8
//! memory = 10
//! multistart_count = 1
//! perturbation = 0.1
//! execution = "parallel"          # or sequential
//!
//! [output]                        # optional
//! dir = "out"
//! stem = "sweep"
//! ```
//!
//! End conditions are `free`, `value` (`value`), `clamped` (`value`,
//! `slope`) and `slope` (`slope`).

use std::path::{Path, PathBuf};

use phasefield_core::{make_grid, BoundarySpec, Execution, Grid, Potential, SolveOptions};
use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub memory: usize,
    pub multistart_count: usize,
    pub perturbation: f64,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        SolverConfig {
            max_iterations: d.max_iterations,
            gradient_tolerance: d.gradient_tolerance,
            memory: d.memory,
            multistart_count: d.multistart_count,
            perturbation: d.perturbation,
            execution: d.execution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub stem: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            stem: "sweep".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_potential")]
    pub potential: String,
    #[serde(default)]
    pub seed: u64,
    pub domain: Domain,
    #[serde(default = "BoundarySpec::free")]
    pub boundary: BoundarySpec,
    pub k_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_potential() -> String {
    "standard_quartic".into()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.epsilon_values.is_empty() {
            return Err(LabError::Config(
                "k_values and epsilon_values must be nonempty".into(),
            ));
        }
        if self.k_values.iter().any(|k| !k.is_finite()) {
            return Err(LabError::Config("k_values must be finite".into()));
        }
        if self
            .epsilon_values
            .iter()
            .any(|e| !(*e > 0.0 && e.is_finite()))
        {
            return Err(LabError::Config("epsilon_values must be positive".into()));
        }
        self.grid()?;
        self.potential()?;
        self.solve_options(0).validate()?;
        for &(i, _) in &self.boundary.pinned {
            if i >= self.domain.n {
                return Err(LabError::Config(format!(
                    "pinned node {i} outside the grid"
                )));
            }
        }
        Ok(())
    }

    /// Warnings that do not stop a run: currently grids coarser than `ε/8`.
    pub fn warnings(&self) -> Vec<String> {
        let Ok(grid) = self.grid() else {
            return Vec::new();
        };
        let smallest = self
            .epsilon_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if grid.h() > smallest / 8.0 {
            vec![format!(
                "grid spacing {:.3e} exceeds epsilon/8 = {:.3e}; layers will be under-resolved",
                grid.h(),
                smallest / 8.0
            )]
        } else {
            Vec::new()
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(make_grid(self.domain.a, self.domain.b, self.domain.n)?)
    }

    pub fn potential(&self) -> Result<Potential> {
        Ok(Potential::by_name(&self.potential)?)
    }

    pub fn solve_options(&self, seed: u64) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            max_iterations: s.max_iterations,
            gradient_tolerance: s.gradient_tolerance,
            memory: s.memory,
            multistart_count: s.multistart_count,
            perturbation: s.perturbation,
            seed,
            execution: s.execution,
            ..SolveOptions::default()
        }
    }
}
