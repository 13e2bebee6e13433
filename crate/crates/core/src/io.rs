//! File formats: dataset CSV plus JSON sidecar, design-matrix CSV dumps and
//! posterior JSON exports.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dictionary::{BasisSpec, DesignMatrix};
use crate::error::{Error, Result};
use crate::evaluation::{fmt_num, summarize_posterior, MarginalSummary, PosteriorSummary};
use crate::inference::{ChainDiagnostics, PosteriorChain};
use crate::scalar::Real;
use crate::simulator::{Dataset, OscillatorParams};

pub const DATASET_HEADER: [&str; 5] = ["t", "y", "ydot", "yddot", "F"];

/// Hex SHA-256 of the canonical JSON encoding of `value`.
pub fn config_hash<S: Serialize>(value: &S) -> String {
    let bytes = serde_json::to_vec(value).expect("configuration serialises to JSON");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse { path: path.to_path_buf(), message: e.to_string() }
}

pub fn write_dataset_csv<T: Real>(data: &Dataset<T>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(DATASET_HEADER).map_err(|e| csv_err(path, e))?;
    for i in 0..data.len() {
        w.write_record([
            fmt_num(data.t[i]),
            fmt_num(data.y[i]),
            fmt_num(data.ydot[i]),
            fmt_num(data.yddot[i]),
            fmt_num(data.force[i]),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a dataset CSV. The sample rate comes from the time column; the label
/// from the file stem.
pub fn read_dataset_csv<T: Real>(path: &Path) -> Result<Dataset<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(BufReader::new(file));
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != DATASET_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("expected header {}", DATASET_HEADER.join(",")),
        });
    }
    let mut cols: [Vec<T>; 5] = Default::default();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        for (c, field) in cols.iter_mut().zip(rec.iter()) {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                message: format!("row {}: cannot parse '{field}'", row + 1),
            })?;
            c.push(T::lit(v));
        }
    }
    let [t, y, ydot, yddot, force] = cols;
    if t.len() < 2 {
        return Err(Error::Parse { path: path.to_path_buf(), message: "need at least two rows".into() });
    }
    let fs = T::from_usize_lossy(t.len() - 1) / (t[t.len() - 1] - t[0]);
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let data = Dataset { t, y, ydot, yddot, force, fs, label };
    data.validate()?;
    Ok(data)
}

/// JSON sidecar written next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub label: String,
    pub fs: f64,
    pub n_samples: usize,
    pub params: OscillatorParams<f64>,
    pub scale_f: f64,
    pub forcing_seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
}

/// `<csv stem>.meta.json` next to the CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn write_json<S: Serialize>(value: &S, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Header = basis labels, one row per sample.
pub fn write_design_matrix_csv<T: Real, W: Write>(design: &DesignMatrix<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map = |e: csv::Error| Error::config(format!("csv write failed: {e}"));
    w.write_record(design.basis().labels()).map_err(map)?;
    for i in 0..design.n_rows() {
        w.write_record(design.row(i).iter().map(|&v| fmt_num(v))).map_err(map)?;
    }
    w.flush().map_err(|e| Error::config(format!("csv flush failed: {e}")))
}

/// Serialised posterior: summaries always, raw draws unless summary-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorExport {
    pub basis: BasisSpec,
    pub task_labels: Vec<String>,
    pub summary: PosteriorSummary<f64>,
    pub alpha2_summary: Vec<MarginalSummary<f64>>,
    pub diagnostics: ChainDiagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_draws: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2_draws: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2_draws: Option<Vec<Vec<f64>>>,
    pub config: serde_json::Value,
}

impl PosteriorExport {
    pub fn new(chain: &PosteriorChain<f64>, config: serde_json::Value, summary_only: bool) -> Self {
        let summary = summarize_posterior(chain);
        let alpha2_summary = {
            let relabelled = PosteriorChain {
                w_draws: chain.alpha2_draws.clone(),
                ..chain.clone()
            };
            summarize_posterior(&relabelled).terms
        };
        Self {
            basis: chain.basis.clone(),
            task_labels: chain.task_labels.clone(),
            summary,
            alpha2_summary,
            diagnostics: chain.diagnostics.clone(),
            w_draws: (!summary_only).then(|| chain.w_draws.clone()),
            alpha2_draws: (!summary_only).then(|| chain.alpha2_draws.clone()),
            sigma2_draws: (!summary_only).then(|| chain.sigma2_draws.clone()),
            config,
        }
    }

    /// Reassembles a chain when the draws were exported.
    pub fn to_chain(&self) -> Option<PosteriorChain<f64>> {
        Some(PosteriorChain {
            basis: self.basis.clone(),
            task_labels: self.task_labels.clone(),
            w_draws: self.w_draws.clone()?,
            alpha2_draws: self.alpha2_draws.clone()?,
            sigma2_draws: self.sigma2_draws.clone()?,
            diagnostics: self.diagnostics.clone(),
        })
    }
}
