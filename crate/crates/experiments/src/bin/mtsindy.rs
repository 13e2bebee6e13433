use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtsindy::dictionary::true_weight_vector;
use mtsindy::evaluation::{fmt_num, nmse, recovery_report};
use mtsindy::inference::{predict_response, WeightSource};
use mtsindy::io::{read_dataset_csv, read_json, sidecar_path, write_json, DatasetMetadata, PosteriorExport};
use mtsindy::rng::derive_seed;
use mtsindy::{Dataset, OscillatorParams, TaskData};
use mtsindy_experiments::config::{parse_hyper, parse_list};
use mtsindy_experiments::output::{write_dataset, write_study};
use mtsindy_experiments::scenario::{fit_datasets, simulate_task};
use mtsindy_experiments::{
    reproduce_from_manifest, reproduce_paper, run_nmse_study, ExperimentError, Mode, NmseSplit, Overrides,
    Result, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "mtsindy", version, about = "Single- and multi-task Bayesian equation discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one dataset per excitation scale and write CSV + sidecar.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Replicate index used to derive the forcing seeds.
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
    /// Fit dataset CSVs and write the posterior as JSON.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: FitMode,
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
    },
    /// Score a posterior on dataset CSVs; writes an NMSE/recovery CSV.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        posterior: PathBuf,
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
    },
    /// Run all reference scenarios and the NMSE study into one output folder.
    Reproduce {
        #[command(flatten)]
        common: Common,
        /// Regenerate from an existing manifest instead of a config.
        #[arg(long, conflicts_with = "config")]
        manifest: Option<PathBuf>,
    },
    /// Replicated paired ST/MT NMSE study.
    Study {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FitMode {
    St,
    Mt,
}

#[derive(Args)]
struct Common {
    /// TOML scenario config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated excitation scales, e.g. 10,100,1000.
    #[arg(long)]
    scales: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Comma-separated a,b,lambda.
    #[arg(long)]
    hyper: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Std of the Gaussian noise added to recorded acceleration (m/s^2).
    #[arg(long)]
    noise: Option<f64>,
    /// Report NMSE on fresh held-out records instead of the training data.
    #[arg(long)]
    held_out: bool,
    /// Export posterior summaries without raw draws.
    #[arg(long)]
    summary_only: bool,
    /// Output file or directory.
    #[arg(long, short)]
    output: PathBuf,
}

impl Common {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            seed: self.seed,
            scales: self.scales.as_deref().map(parse_list).transpose()?,
            iterations: self.iterations,
            burn_in: self.burn_in,
            hyper: self.hyper.as_deref().map(parse_hyper).transpose()?,
            replicates: self.replicates,
            noise_std: self.noise,
            nmse_split: self.held_out.then_some(NmseSplit::HeldOut),
            summary_only: self.summary_only,
        })
    }

    /// Config file (or the multi-task reference default) with flags applied.
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        cfg.apply(&self.overrides()?);
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate { common, replicate } => simulate(&common, replicate),
        Command::Fit { common, mode, datasets } => fit(&common, mode, &datasets),
        Command::Evaluate { common, posterior, datasets } => evaluate(&common, &posterior, &datasets),
        Command::Reproduce { common, manifest } => {
            let manifest = match manifest {
                Some(path) => reproduce_from_manifest(&path, &common.output)?,
                None => {
                    let cfg = common.scenario()?;
                    reproduce_paper(&cfg, &common.output)?
                }
            };
            println!(
                "wrote {} files for {} scenarios and a {}-replicate study to {}",
                manifest.files.len(),
                manifest.scenarios.len(),
                manifest.study.replicates,
                common.output.display()
            );
            Ok(())
        }
        Command::Study { common } => {
            let cfg = common.scenario()?;
            let study = run_nmse_study(&cfg)?;
            write_study(&common.output, &study, cfg.nmse_split)?;
            for a in study.aggregates.iter().filter(|a| a.split == cfg.nmse_split) {
                println!("{} f={} n={} mean={:.6} std={:.6}", a.scenario, a.excitation, a.n, a.mean, a.std);
            }
            if !study.failures.is_empty() {
                eprintln!("{} replicate(s) failed", study.failures.len());
            }
            Ok(())
        }
    }
}

fn simulate(common: &Common, replicate: usize) -> Result<()> {
    let cfg = common.scenario()?;
    cfg.sim.validate()?;
    for &f in &cfg.excitation_scales {
        let data = simulate_task(&cfg, replicate, f, false)?;
        let path = write_dataset(&common.output, &data, &cfg, replicate, f)?;
        println!("{}", path.display());
    }
    Ok(())
}

/// Reads a dataset and, when present, the oscillator parameters from its
/// sidecar.
fn load_dataset(path: &Path) -> Result<(Dataset, Option<OscillatorParams>)> {
    let data = read_dataset_csv(path)?;
    let meta = sidecar_path(path);
    let params = if meta.exists() { Some(read_json::<DatasetMetadata>(&meta)?.params) } else { None };
    Ok((data, params))
}

fn load_all(paths: &[PathBuf], fallback: OscillatorParams) -> Result<(Vec<Dataset>, OscillatorParams)> {
    let mut datasets = Vec::new();
    let mut params = None;
    for p in paths {
        let (d, meta) = load_dataset(p)?;
        if let (Some(prev), Some(cur)) = (params, meta) {
            if prev != cur {
                return Err(ExperimentError::file(p, "oscillator parameters differ from the other datasets"));
            }
        }
        params = params.or(meta);
        datasets.push(d);
    }
    Ok((datasets, params.unwrap_or(fallback)))
}

fn fit(common: &Common, mode: FitMode, paths: &[PathBuf]) -> Result<()> {
    let mut cfg = common.scenario()?;
    let (datasets, params) = load_all(paths, cfg.oscillator)?;
    cfg.oscillator = params;
    cfg.mode = match mode {
        FitMode::St => Mode::SingleTask,
        FitMode::Mt => Mode::MultiTask,
    };
    match (cfg.mode, datasets.len()) {
        (Mode::SingleTask, 1) | (Mode::MultiTask, 2..) => {}
        (m, n) => {
            return Err(ExperimentError::config(format!("--mode {} cannot fit {n} dataset(s)", m.short())))
        }
    }
    cfg.oscillator.validate()?;
    cfg.hyper.validate()?;
    cfg.chain.validate()?;
    let seed = derive_seed(cfg.chain.seed, &[cfg.master_seed]);
    let chain = fit_datasets(&cfg, &datasets, seed)?;
    let echo = serde_json::json!({
        "scenario": cfg,
        "chain_seed": seed,
        "datasets": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    let export = PosteriorExport::new(&chain, echo, cfg.summary_only);
    write_json(&export, &common.output)?;
    if chain.diagnostics.low_ess_warning {
        eprintln!("warning: effective sample size below the configured floor");
    }
    println!("{}", common.output.display());
    Ok(())
}

fn evaluate(common: &Common, posterior: &Path, paths: &[PathBuf]) -> Result<()> {
    let cfg = common.scenario()?;
    let export: PosteriorExport = read_json(posterior)?;
    let (datasets, params) = load_all(paths, cfg.oscillator)?;
    let truth = true_weight_vector(&params, &export.basis);
    let recovery = recovery_report(&export.summary, &truth)?;
    let w = export.summary.means();

    let out = &common.output;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| ExperimentError::file(dir, e))?;
    }
    let mut csv = csv::Writer::from_path(out).map_err(|e| ExperimentError::file(out, e))?;
    let io = |e: csv::Error| ExperimentError::file(out, e);
    csv.write_record(["task", "nmse", "n", "target_variance", "l2_distance", "active_match"])
        .map_err(io)?;
    for d in &datasets {
        let task = TaskData::from_dataset(d, &export.basis, params.m)?;
        let pred = predict_response(WeightSource::Point(&w), &task)?;
        let score = nmse(task.target(), &pred.mean)?;
        csv.write_record([
            d.label.clone(),
            fmt_num(score.value),
            score.n.to_string(),
            fmt_num(score.target_variance),
            fmt_num(recovery.l2_distance),
            recovery.all_active_match().to_string(),
        ])
        .map_err(io)?;
        println!("{} nmse={:.6} l2={:.6}", d.label, score.value, recovery.l2_distance);
    }
    csv.flush().map_err(|e| ExperimentError::file(out, e))
}
