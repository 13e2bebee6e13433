//! Full figure-data pipeline: three single-task scenarios, one multi-task
//! scenario and the replicated NMSE study, plus a manifest from which every
//! file can be regenerated.

use std::path::{Path, PathBuf};

use mtsindy::io::{read_json, write_json};
use serde::{Deserialize, Serialize};

use crate::config::{Mode, ScenarioConfig, SCHEMA_VERSION};
use crate::error::{ExperimentError, Result};
use crate::output::{file_sha256, write_scenario, write_study};
use crate::scenario::{chain_seed, dataset_seed, run_scenario};
use crate::study::{run_nmse_study, ReplicateFailure};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const STUDY_FOLDER: &str = "study";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub excitation: f64,
    pub forcing_seed: u64,
    pub held_out_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestScenario {
    pub folder: String,
    pub mode: Mode,
    pub config_hash: String,
    pub chain_seed: u64,
    pub datasets: Vec<SeedEntry>,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStudy {
    pub folder: String,
    pub replicates: usize,
    pub config_hash: String,
    pub failures: Vec<ReplicateFailure>,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    /// Single- and multi-task fits of one replicate always use the same
    /// datasets.
    pub paired_design: bool,
    pub base_config_hash: String,
    pub base_config: ScenarioConfig,
    pub scenarios: Vec<ManifestScenario>,
    pub study: ManifestStudy,
    pub files: Vec<ManifestFile>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let m: Manifest = read_json(path)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(ExperimentError::file(
                path,
                format!("unsupported manifest schema_version {}", m.schema_version),
            ));
        }
        m.base_config.validate()?;
        Ok(m)
    }
}

/// Single-task configs (one per scale) followed by the multi-task config.
pub fn paper_scenarios(base: &ScenarioConfig) -> Vec<ScenarioConfig> {
    let mut out: Vec<ScenarioConfig> = base
        .excitation_scales
        .iter()
        .map(|&f| base.derive(format!("st_f{f}"), Mode::SingleTask, vec![f]))
        .collect();
    out.push(base.derive("mt", Mode::MultiTask, base.excitation_scales.clone()));
    out
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Runs every scenario and the study from `base` and writes them under
/// `out_dir`. The base config must list at least two scales.
pub fn reproduce_paper(base: &ScenarioConfig, out_dir: &Path) -> Result<Manifest> {
    let study_cfg = base.derive("study", Mode::MultiTask, base.excitation_scales.clone());
    study_cfg.validate()?;

    let mut written: Vec<PathBuf> = Vec::new();
    let mut scenarios = Vec::new();
    for cfg in paper_scenarios(base) {
        let outcome = run_scenario(&cfg)?;
        written.extend(write_scenario(&out_dir.join(&cfg.label), &outcome, &cfg)?);
        scenarios.push(ManifestScenario {
            folder: cfg.label.clone(),
            mode: cfg.mode,
            config_hash: cfg.config_hash(),
            chain_seed: chain_seed(&cfg, 0),
            datasets: cfg
                .excitation_scales
                .iter()
                .map(|&f| SeedEntry {
                    excitation: f,
                    forcing_seed: dataset_seed(cfg.master_seed, 0, f, false),
                    held_out_seed: dataset_seed(cfg.master_seed, 0, f, true),
                })
                .collect(),
            config: cfg,
        });
    }

    let study = run_nmse_study(&study_cfg)?;
    written.extend(write_study(&out_dir.join(STUDY_FOLDER), &study, study_cfg.nmse_split)?);

    let files = written
        .iter()
        .map(|p| Ok(ManifestFile { path: relative(out_dir, p), sha256: file_sha256(p)? }))
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        paired_design: true,
        base_config_hash: base.config_hash(),
        base_config: base.clone(),
        scenarios,
        study: ManifestStudy {
            folder: STUDY_FOLDER.into(),
            replicates: study_cfg.replicates,
            config_hash: study_cfg.config_hash(),
            failures: study.failures.clone(),
            config: study_cfg,
        },
        files,
    };
    write_json(&manifest, &out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Regenerates a bundle from a previously written manifest.
pub fn reproduce_from_manifest(manifest_path: &Path, out_dir: &Path) -> Result<Manifest> {
    let manifest = Manifest::load(manifest_path)?;
    reproduce_paper(&manifest.base_config, out_dir)
}
