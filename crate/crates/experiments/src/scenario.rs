//! One scenario = simulate a dataset per excitation scale, fit them (jointly
//! in multi-task mode) and evaluate the posterior.

use mtsindy::dictionary::true_weight_vector;
use mtsindy::evaluation::{nmse, recovery_report, summarize_posterior};
use mtsindy::inference::{predict_response, run_gibbs, Prediction, WeightSource};
use mtsindy::rng::derive_seed;
use mtsindy::simulator::simulate_dataset;
use mtsindy::{Dataset, ForcingSpec, NmseResult, PosteriorChain, PosteriorSummary, RecoveryReport, TaskData};

use crate::config::{Mode, NmseSplit, ScenarioConfig};
use crate::error::Result;

const DATA_STREAM: u64 = 1;
const HELD_OUT_STREAM: u64 = 2;
const CHAIN_STREAM: u64 = 3;

/// Forcing seed of the record at `scale` in `replicate`. Keyed by the scale
/// value, so single- and multi-task fits of one replicate share data.
pub fn dataset_seed(master_seed: u64, replicate: usize, scale: f64, held_out: bool) -> u64 {
    let stream = if held_out { HELD_OUT_STREAM } else { DATA_STREAM };
    derive_seed(master_seed, &[stream, replicate as u64, scale.to_bits()])
}

/// Chain seed of one fit, keyed by the mode and the full scale list.
pub fn chain_seed(config: &ScenarioConfig, replicate: usize) -> u64 {
    let mode = match config.mode {
        Mode::SingleTask => 0,
        Mode::MultiTask => 1,
    };
    let mut path = vec![config.master_seed, CHAIN_STREAM, replicate as u64, mode];
    path.extend(config.excitation_scales.iter().map(|f| f.to_bits()));
    derive_seed(config.chain.seed, &path)
}

pub fn simulate_task(config: &ScenarioConfig, replicate: usize, scale: f64, held_out: bool) -> Result<Dataset> {
    let seed = dataset_seed(config.master_seed, replicate, scale, held_out);
    let spec = ForcingSpec::new(scale, seed, 1.0 / config.sim.dt_fast);
    let mut data = simulate_dataset(&config.oscillator, &spec, &config.sim)?;
    data.label = task_label(scale);
    Ok(data)
}

pub fn task_label(scale: f64) -> String {
    format!("f{scale}")
}

/// Fits the datasets jointly (one task each) with the configured prior and
/// chain settings.
pub fn fit_datasets(config: &ScenarioConfig, datasets: &[Dataset], seed: u64) -> Result<PosteriorChain> {
    let tasks = datasets
        .iter()
        .map(|d| TaskData::from_dataset(d, &config.basis, config.oscillator.m))
        .collect::<mtsindy::Result<Vec<_>>>()?;
    let chain_cfg = mtsindy::ChainConfig { seed, ..config.chain.clone() };
    Ok(run_gibbs(&tasks, &config.hyper, &chain_cfg)?)
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub excitation: f64,
    pub dataset: Dataset,
    pub prediction: Prediction<f64>,
    pub nmse_train: NmseResult,
    pub nmse_held_out: NmseResult,
}

impl TaskOutcome {
    pub fn nmse(&self, split: NmseSplit) -> &NmseResult {
        match split {
            NmseSplit::Train => &self.nmse_train,
            NmseSplit::HeldOut => &self.nmse_held_out,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub label: String,
    pub replicate: usize,
    pub chain_seed: u64,
    pub chain: PosteriorChain,
    pub summary: PosteriorSummary,
    pub recovery: RecoveryReport,
    pub tasks: Vec<TaskOutcome>,
}

impl ScenarioOutcome {
    pub fn task(&self, excitation: f64) -> Option<&TaskOutcome> {
        self.tasks.iter().find(|t| t.excitation == excitation)
    }
}

/// Runs replicate 0 of the scenario.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    run_scenario_replicate(config, 0)
}

pub fn run_scenario_replicate(config: &ScenarioConfig, replicate: usize) -> Result<ScenarioOutcome> {
    let inner = || -> Result<ScenarioOutcome> {
        config.validate()?;
        let datasets = config
            .excitation_scales
            .iter()
            .map(|&f| simulate_task(config, replicate, f, false))
            .collect::<Result<Vec<_>>>()?;
        let seed = chain_seed(config, replicate);
        let chain = fit_datasets(config, &datasets, seed)?;
        evaluate_chain(config, replicate, seed, chain, datasets)
    };
    inner().map_err(|e| e.in_scenario(&config.label, replicate))
}

/// Summaries, recovery and per-task NMSE (training and held-out) of a fitted
/// chain.
pub fn evaluate_chain(
    config: &ScenarioConfig,
    replicate: usize,
    chain_seed: u64,
    chain: PosteriorChain,
    datasets: Vec<Dataset>,
) -> Result<ScenarioOutcome> {
    let summary = summarize_posterior(&chain);
    let truth = true_weight_vector(&config.oscillator, &config.basis);
    let recovery = recovery_report(&summary, &truth)?;
    let w_mean = chain.posterior_mean_w();
    let mut tasks = Vec::with_capacity(datasets.len());
    for (dataset, &excitation) in datasets.into_iter().zip(&config.excitation_scales) {
        let train = TaskData::from_dataset(&dataset, &config.basis, config.oscillator.m)?;
        let prediction = predict_response(WeightSource::Chain(&chain), &train)?;
        let nmse_train = nmse(train.target(), &prediction.mean)?;
        let fresh = simulate_task(config, replicate, excitation, true)?;
        let held = TaskData::from_dataset(&fresh, &config.basis, config.oscillator.m)?;
        let held_pred = predict_response(WeightSource::Point(&w_mean), &held)?;
        let nmse_held_out = nmse(held.target(), &held_pred.mean)?;
        tasks.push(TaskOutcome { excitation, dataset, prediction, nmse_train, nmse_held_out });
    }
    Ok(ScenarioOutcome {
        label: config.label.clone(),
        replicate,
        chain_seed,
        chain,
        summary,
        recovery,
        tasks,
    })
}
