//! Replicated, paired single- versus multi-task NMSE study.

use mtsindy::evaluation::NmseRow;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, NmseSplit, ScenarioConfig};
use crate::error::{ExperimentError, Result};
use crate::scenario::{chain_seed, evaluate_chain, fit_datasets, simulate_task, ScenarioOutcome};

/// One fitted model evaluated on one excitation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    /// `"ST"` or `"MT"`.
    pub scenario: String,
    pub excitation: f64,
    pub nmse_train: f64,
    pub nmse_held_out: f64,
    pub l2_distance: f64,
    pub active_match: bool,
    pub w_mean: Vec<f64>,
}

impl FitRecord {
    pub fn nmse(&self, split: NmseSplit) -> f64 {
        match split {
            NmseSplit::Train => self.nmse_train,
            NmseSplit::HeldOut => self.nmse_held_out,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub records: Vec<FitRecord>,
}

impl ReplicateResult {
    pub fn record(&self, scenario: &str, excitation: f64) -> Option<&FitRecord> {
        self.records.iter().find(|r| r.scenario == scenario && r.excitation == excitation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub replicate: usize,
    pub message: String,
}

/// Mean and sample standard deviation of NMSE over successful replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub scenario: String,
    pub excitation: f64,
    pub split: NmseSplit,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config_hash: String,
    pub excitation_scales: Vec<f64>,
    /// Successful replicates, ascending by index.
    pub replicates: Vec<ReplicateResult>,
    pub failures: Vec<ReplicateFailure>,
    pub aggregates: Vec<CellAggregate>,
}

impl StudyResult {
    pub fn aggregate(&self, scenario: &str, excitation: f64, split: NmseSplit) -> Option<&CellAggregate> {
        self.aggregates
            .iter()
            .find(|a| a.scenario == scenario && a.excitation == excitation && a.split == split)
    }

    /// Records of one (scenario, excitation) cell in replicate order.
    pub fn cell(&self, scenario: &str, excitation: f64) -> Vec<&FitRecord> {
        self.replicates.iter().filter_map(|r| r.record(scenario, excitation)).collect()
    }

    pub fn nmse_rows(&self, split: NmseSplit) -> Vec<NmseRow> {
        let mut rows = Vec::new();
        for scenario in ["ST", "MT"] {
            for &f in &self.excitation_scales {
                for r in &self.replicates {
                    if let Some(rec) = r.record(scenario, f) {
                        rows.push(NmseRow {
                            scenario: scenario.into(),
                            excitation: f,
                            replicate: r.replicate,
                            value: rec.nmse(split),
                        });
                    }
                }
            }
        }
        rows
    }
}

fn record(scenario: Mode, excitation: f64, outcome: &ScenarioOutcome) -> FitRecord {
    let task = outcome.task(excitation).expect("outcome covers the excitation it was fitted on");
    FitRecord {
        scenario: scenario.short().into(),
        excitation,
        nmse_train: task.nmse_train.value,
        nmse_held_out: task.nmse_held_out.value,
        l2_distance: outcome.recovery.l2_distance,
        active_match: outcome.recovery.all_active_match(),
        w_mean: outcome.summary.means(),
    }
}

/// Simulates every excitation level once, fits a single-task model to each
/// and one multi-task model to all of them, on identical data.
pub fn run_replicate(config: &ScenarioConfig, replicate: usize) -> Result<ReplicateResult> {
    let datasets = config
        .excitation_scales
        .iter()
        .map(|&f| simulate_task(config, replicate, f, false))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_scenario(&config.label, replicate))?;
    let mut records = Vec::with_capacity(2 * datasets.len());
    for (i, &f) in config.excitation_scales.iter().enumerate() {
        let st = config.derive(format!("st_f{f}"), Mode::SingleTask, vec![f]);
        let seed = chain_seed(&st, replicate);
        let chain = fit_datasets(&st, &datasets[i..=i], seed)
            .map_err(|e| e.in_scenario(&st.label, replicate))?;
        let outcome = evaluate_chain(&st, replicate, seed, chain, vec![datasets[i].clone()])
            .map_err(|e| e.in_scenario(&st.label, replicate))?;
        records.push(record(Mode::SingleTask, f, &outcome));
    }
    let mt = config.derive("mt", Mode::MultiTask, config.excitation_scales.clone());
    let seed = chain_seed(&mt, replicate);
    let chain = fit_datasets(&mt, &datasets, seed).map_err(|e| e.in_scenario(&mt.label, replicate))?;
    let outcome =
        evaluate_chain(&mt, replicate, seed, chain, datasets).map_err(|e| e.in_scenario(&mt.label, replicate))?;
    for &f in &config.excitation_scales {
        records.push(record(Mode::MultiTask, f, &outcome));
    }
    Ok(ReplicateResult { replicate, records })
}

/// Runs replicates `0..config.replicates` in parallel.
pub fn run_nmse_study(config: &ScenarioConfig) -> Result<StudyResult> {
    if config.replicates < 2 {
        return Err(ExperimentError::config("an NMSE study needs at least two replicates"));
    }
    let indices: Vec<usize> = (0..config.replicates).collect();
    run_study_replicates(config, &indices)
}

/// Runs the listed replicate indices. Aggregation sorts by index, so the
/// result does not depend on the order given or on scheduling.
pub fn run_study_replicates(config: &ScenarioConfig, indices: &[usize]) -> Result<StudyResult> {
    let study = config.derive(config.label.clone(), Mode::MultiTask, config.excitation_scales.clone());
    study.validate()?;
    let outcomes: Vec<(usize, Result<ReplicateResult>)> =
        indices.par_iter().map(|&r| (r, run_replicate(&study, r))).collect();

    let mut replicates = Vec::new();
    let mut failures = Vec::new();
    for (r, outcome) in outcomes {
        match outcome {
            Ok(res) => replicates.push(res),
            Err(e) => failures.push(ReplicateFailure { replicate: r, message: e.to_string() }),
        }
    }
    replicates.sort_by_key(|r| r.replicate);
    failures.sort_by_key(|f| f.replicate);

    let mut result = StudyResult {
        config_hash: config.config_hash(),
        excitation_scales: study.excitation_scales.clone(),
        replicates,
        failures,
        aggregates: Vec::new(),
    };
    result.aggregates = aggregate(&result);
    Ok(result)
}

fn aggregate(result: &StudyResult) -> Vec<CellAggregate> {
    let mut out = Vec::new();
    for split in [NmseSplit::Train, NmseSplit::HeldOut] {
        for scenario in ["ST", "MT"] {
            for &f in &result.excitation_scales {
                let values: Vec<f64> = result.cell(scenario, f).iter().map(|r| r.nmse(split)).collect();
                let (mean, std) = mean_std(&values);
                out.push(CellAggregate {
                    scenario: scenario.into(),
                    excitation: f,
                    split,
                    n: values.len(),
                    mean,
                    std,
                });
            }
        }
    }
    out
}

/// Mean and sample (n - 1) standard deviation; NaN where undefined.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}
