//! Experiment harness on top of `phasefield_core`: `(k, ε)` sweeps with
//! minimizer classification, Γ-limit scaling tables, blow-up probes for the
//! oscillatory regime, and CSV/JSON/SVG reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod config;
pub mod experiments;
pub mod report;
pub mod sweep;

pub use classify::{
    count_oscillations, count_transitions, OSCILLATION_NOISE_FLOOR, TRANSITION_THRESHOLD,
};
pub use config::ExperimentConfig;
pub use experiments::{
    blowup_probe, gamma_limit_table, BlowupRow, BlowupTable, GammaRow, GammaTable,
};
pub use report::{emit_report, ReportFormat};
pub use sweep::{run_sweep, SweepRecord};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] phasefield_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse configuration: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("nothing to report")]
    EmptyReport,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
