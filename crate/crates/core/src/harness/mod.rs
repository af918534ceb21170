//! Experiment configuration, point-set generators, the canonical registry
//! and the staged pipeline that writes CSV/JSON outputs.

mod config;
mod pointsets;
mod registry;
mod run;

pub use config::{AuditSpec, CentersSpec, ExperimentConfig, OutputSpec, SpectraSpec};
pub use pointsets::{generate_pointset, PointSetSpec};
pub use registry::{canonical, CANONICAL_NAMES};
pub use run::{
    audit_table, run, verdict_table, AuditDocument, ExitStatus, HarnessReport, RunManifest, RunOptions, RunOutcome,
    SpectrumRow, Stage, StageTiming,
};
