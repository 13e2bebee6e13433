//! CSV and JSON emitters for scenario and study results.

use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use mtsindy::dictionary::true_weight_vector;
use mtsindy::evaluation::{fmt_num, write_nmse_csv, write_weight_summary_csv, NmseRow};
use mtsindy::io::{sidecar_path, write_dataset_csv, write_json, DatasetMetadata, PosteriorExport};
use mtsindy::Dataset;
use sha2::{Digest, Sha256};

use crate::config::{NmseSplit, ScenarioConfig};
use crate::error::{ExperimentError, Result};
use crate::scenario::{dataset_seed, ScenarioOutcome};
use crate::study::StudyResult;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| ExperimentError::file(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| ExperimentError::file(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| ExperimentError::file(path, e))
}

fn row<I, S>(w: &mut csv::Writer<BufWriter<File>>, path: &Path, fields: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).map_err(|e| ExperimentError::file(path, e))
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| ExperimentError::file(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes `data_<label>.csv` and its JSON sidecar into `dir`.
pub fn write_dataset(
    dir: &Path,
    data: &Dataset,
    config: &ScenarioConfig,
    replicate: usize,
    excitation: f64,
) -> Result<PathBuf> {
    let path = dir.join(format!("data_{}.csv", data.label));
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| ExperimentError::file(parent, e))?;
    }
    write_dataset_csv(data, &path)?;
    let meta = DatasetMetadata {
        label: data.label.clone(),
        fs: data.fs,
        n_samples: data.len(),
        params: config.oscillator,
        scale_f: excitation,
        forcing_seed: dataset_seed(config.master_seed, replicate, excitation, false),
        config_hash: config.config_hash(),
        config: serde_json::to_value(config).map_err(|e| ExperimentError::config(e.to_string()))?,
    };
    write_json(&meta, &sidecar_path(&path))?;
    Ok(path)
}

/// `t,target,mean,lower,upper` for one task of a scenario.
pub fn write_response_csv(path: &Path, outcome: &ScenarioOutcome, excitation: f64) -> Result<()> {
    let task = outcome
        .task(excitation)
        .ok_or_else(|| ExperimentError::config(format!("no task at excitation {excitation}")))?;
    let mut w = csv_writer(path)?;
    row(&mut w, path, ["t", "target", "mean", "lower", "upper"])?;
    let p = &task.prediction;
    for i in 0..task.dataset.len() {
        row(
            &mut w,
            path,
            [task.dataset.t[i], task.dataset.yddot[i], p.mean[i], p.lower[i], p.upper[i]].map(fmt_num),
        )?;
    }
    finish(w, path)
}

/// `term,truth,mean,signed_error,active,active_match`.
pub fn write_recovery_csv(path: &Path, outcome: &ScenarioOutcome, config: &ScenarioConfig) -> Result<()> {
    let truth = true_weight_vector(&config.oscillator, &config.basis);
    let mut w = csv_writer(path)?;
    row(&mut w, path, ["term", "truth", "mean", "signed_error", "active", "active_match"])?;
    for (j, term) in outcome.summary.terms.iter().enumerate() {
        row(
            &mut w,
            path,
            [
                term.label.clone(),
                fmt_num(truth[j]),
                fmt_num(term.mean),
                fmt_num(outcome.recovery.signed_error[j]),
                outcome.summary.active[j].to_string(),
                outcome.recovery.active_match[j].to_string(),
            ],
        )?;
    }
    finish(w, path)
}

/// Every file of one scenario folder. Returns the paths written.
pub fn write_scenario(dir: &Path, outcome: &ScenarioOutcome, config: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for task in &outcome.tasks {
        let data = write_dataset(dir, &task.dataset, config, outcome.replicate, task.excitation)?;
        written.push(sidecar_path(&data));
        written.push(data);
        let path = dir.join(format!("response_{}.csv", task.dataset.label));
        write_response_csv(&path, outcome, task.excitation)?;
        written.push(path);
    }

    let path = dir.join("weights.csv");
    write_weight_summary_csv(&outcome.summary, create(&path)?)?;
    written.push(path);

    let path = dir.join("recovery.csv");
    write_recovery_csv(&path, outcome, config)?;
    written.push(path);

    let rows: Vec<NmseRow> = outcome
        .tasks
        .iter()
        .map(|t| NmseRow {
            scenario: outcome.label.clone(),
            excitation: t.excitation,
            replicate: outcome.replicate,
            value: t.nmse(config.nmse_split).value,
        })
        .collect();
    let path = dir.join("nmse.csv");
    write_nmse_csv(&rows, create(&path)?)?;
    written.push(path);

    let export = PosteriorExport::new(
        &outcome.chain,
        serde_json::to_value(config).map_err(|e| ExperimentError::config(e.to_string()))?,
        config.summary_only,
    );
    let path = dir.join("posterior.json");
    write_json(&export, &path)?;
    written.push(path);
    Ok(written)
}

/// NMSE tables (headline split plus both splits), recovery distances,
/// aggregates and the full result as JSON.
pub fn write_study(dir: &Path, study: &StudyResult, split: NmseSplit) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, s) in [("nmse.csv", split), ("nmse_train.csv", NmseSplit::Train), ("nmse_held_out.csv", NmseSplit::HeldOut)] {
        let path = dir.join(name);
        write_nmse_csv(&study.nmse_rows(s), create(&path)?)?;
        written.push(path);
    }

    let path = dir.join("recovery.csv");
    let mut w = csv_writer(&path)?;
    row(&mut w, &path, ["scenario", "excitation", "replicate", "l2_distance", "active_match"])?;
    for r in &study.replicates {
        for rec in &r.records {
            row(
                &mut w,
                &path,
                [
                    rec.scenario.clone(),
                    fmt_num(rec.excitation),
                    r.replicate.to_string(),
                    fmt_num(rec.l2_distance),
                    rec.active_match.to_string(),
                ],
            )?;
        }
    }
    finish(w, &path)?;
    written.push(path);

    let path = dir.join("aggregates.csv");
    let mut w = csv_writer(&path)?;
    row(&mut w, &path, ["scenario", "excitation", "split", "n", "mean", "std"])?;
    for a in &study.aggregates {
        row(
            &mut w,
            &path,
            [
                a.scenario.clone(),
                fmt_num(a.excitation),
                a.split.as_str().into(),
                a.n.to_string(),
                fmt_num(a.mean),
                fmt_num(a.std),
            ],
        )?;
    }
    finish(w, &path)?;
    written.push(path);

    let path = dir.join("study.json");
    write_json(study, &path)?;
    written.push(path);
    Ok(written)
}
