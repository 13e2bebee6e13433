//! Prediction accuracy and parameter-recovery summaries.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::PosteriorChain;
use crate::scalar::Real;

/// Quantile levels reported per term.
pub const QUANTILE_LEVELS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmseResult<T> {
    /// Percent; 100 corresponds to predicting the mean of the target.
    pub value: T,
    pub n: usize,
    pub target_variance: T,
}

/// Normalised mean-square error, `100 / (N σ_z²) Σ (z - ẑ)²`, with the
/// population variance of `z`.
pub fn nmse<T: Real>(z: &[T], z_hat: &[T]) -> Result<NmseResult<T>> {
    if z.len() != z_hat.len() {
        return Err(Error::Dimension(format!("{} targets vs {} predictions", z.len(), z_hat.len())));
    }
    if z.len() < 2 {
        return Err(Error::EmptyRequest("NMSE needs at least two samples"));
    }
    let n = T::from_usize_lossy(z.len());
    let var = crate::scalar::population_variance(z);
    if !(var > T::zero()) {
        return Err(Error::UndefinedVariance);
    }
    let sse: T = z.iter().zip(z_hat).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok(NmseResult {
        value: T::lit(100.0) * sse / (n * var),
        n: z.len(),
        target_variance: var,
    })
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted<T: Real>(sorted: &[T], q: f64) -> T {
    match sorted.len() {
        0 => T::nan(),
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = T::lit(pos - lo as f64);
            sorted[lo] + (sorted[hi] - sorted[lo]) * frac
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary<T> {
    pub label: String,
    pub mean: T,
    pub std: T,
    /// At [`QUANTILE_LEVELS`].
    pub quantiles: [T; 5],
}

impl<T: Real> MarginalSummary<T> {
    fn from_draws(label: String, draws: &mut [T]) -> Self {
        let mean = crate::scalar::mean(draws);
        let std = crate::scalar::population_variance(draws).sqrt();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let quantiles = QUANTILE_LEVELS.map(|q| quantile_sorted(draws, q));
        Self { label, mean, std, quantiles }
    }

    pub fn lower95(&self) -> T {
        self.quantiles[0]
    }

    pub fn upper95(&self) -> T {
        self.quantiles[4]
    }

    /// The 95% credible interval excludes zero.
    pub fn excludes_zero(&self) -> bool {
        self.lower95() > T::zero() || self.upper95() < T::zero()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary<T> {
    pub terms: Vec<MarginalSummary<T>>,
    pub sigma2: Vec<MarginalSummary<T>>,
    pub active: Vec<bool>,
}

impl<T: Real> PosteriorSummary<T> {
    pub fn means(&self) -> Vec<T> {
        self.terms.iter().map(|t| t.mean).collect()
    }
}

/// Per-term and per-task marginal summaries of a chain. Intended for chains
/// with at least a hundred draws; shorter chains still summarise but the
/// tail quantiles are crude.
pub fn summarize_posterior<T: Real>(chain: &PosteriorChain<T>) -> PosteriorSummary<T> {
    let labels = chain.basis.labels();
    let terms: Vec<MarginalSummary<T>> = labels
        .into_iter()
        .enumerate()
        .map(|(j, label)| MarginalSummary::from_draws(label, &mut chain.w_trace(j)))
        .collect();
    let sigma2 = chain
        .task_labels
        .iter()
        .enumerate()
        .map(|(l, label)| {
            let mut d: Vec<T> = chain.sigma2_draws.iter().map(|r| r[l]).collect();
            MarginalSummary::from_draws(label.clone(), &mut d)
        })
        .collect();
    let active = terms.iter().map(MarginalSummary::excludes_zero).collect();
    PosteriorSummary { terms, sigma2, active }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport<T> {
    /// Posterior mean minus true weight, per term.
    pub signed_error: Vec<T>,
    pub l2_distance: T,
    /// Whether the activity flag agrees with the truth being non-zero.
    pub active_match: Vec<bool>,
}

impl<T: Real> RecoveryReport<T> {
    pub fn all_active_match(&self) -> bool {
        self.active_match.iter().all(|&m| m)
    }
}

pub fn recovery_report<T: Real>(summary: &PosteriorSummary<T>, truth: &[T]) -> Result<RecoveryReport<T>> {
    if summary.terms.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "summary has {} terms, truth {}",
            summary.terms.len(),
            truth.len()
        )));
    }
    let signed_error: Vec<T> = summary.terms.iter().zip(truth).map(|(s, &t)| s.mean - t).collect();
    let l2_distance = signed_error.iter().map(|&e| e * e).sum::<T>().sqrt();
    let active_match = summary
        .active
        .iter()
        .zip(truth)
        .map(|(&a, &t)| a == (t != T::zero()))
        .collect();
    Ok(RecoveryReport { signed_error, l2_distance, active_match })
}

/// Euclidean distance between two weight vectors.
pub fn weight_distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

/// `term,mean,std,q2.5,q25,q50,q75,q97.5,active`.
pub fn write_weight_summary_csv<T: Real, W: Write>(summary: &PosteriorSummary<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map = |e: csv::Error| Error::config(format!("csv write failed: {e}"));
    w.write_record(["term", "mean", "std", "q2.5", "q25", "q50", "q75", "q97.5", "active"])
        .map_err(map)?;
    for (t, &active) in summary.terms.iter().zip(&summary.active) {
        let mut rec = vec![t.label.clone(), fmt_num(t.mean), fmt_num(t.std)];
        rec.extend(t.quantiles.iter().map(|&q| fmt_num(q)));
        rec.push(active.to_string());
        w.write_record(&rec).map_err(map)?;
    }
    w.flush().map_err(|e| Error::config(format!("csv flush failed: {e}")))?;
    Ok(())
}

/// One row of the NMSE distribution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmseRow {
    pub scenario: String,
    pub excitation: f64,
    pub replicate: usize,
    pub value: f64,
}

/// `scenario,excitation,replicate,nmse`.
pub fn write_nmse_csv<W: Write>(rows: &[NmseRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map = |e: csv::Error| Error::config(format!("csv write failed: {e}"));
    w.write_record(["scenario", "excitation", "replicate", "nmse"]).map_err(map)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            fmt_num(r.excitation),
            r.replicate.to_string(),
            fmt_num(r.value),
        ])
        .map_err(map)?;
    }
    w.flush().map_err(|e| Error::config(format!("csv flush failed: {e}")))?;
    Ok(())
}

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_num<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}
