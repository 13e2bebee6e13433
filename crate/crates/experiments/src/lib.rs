//! Scenario runner for the single- versus multi-task equation discovery
//! experiments: reference scenarios, replicated NMSE studies and the
//! figure-data bundle, all driven by a versioned TOML config.

pub mod config;
pub mod error;
pub mod output;
pub mod reproduce;
pub mod scenario;
pub mod study;

pub use config::{Mode, NmseSplit, Overrides, ScenarioConfig, SCHEMA_VERSION};
pub use error::{ExperimentError, Result};
pub use reproduce::{reproduce_from_manifest, reproduce_paper, Manifest};
pub use scenario::{run_scenario, run_scenario_replicate, ScenarioOutcome};
pub use study::{run_nmse_study, run_study_replicates, StudyResult};
