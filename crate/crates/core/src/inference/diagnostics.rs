//! Convergence diagnostics for a single chain, computed on its two halves
//! (split chains).

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterDiagnostics {
    pub ess: f64,
    pub split_rhat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ChainDiagnostics {
    pub w: Vec<ParameterDiagnostics>,
    pub alpha2: Vec<ParameterDiagnostics>,
    pub sigma2: Vec<ParameterDiagnostics>,
    /// Set when some weight has an effective sample size below the configured floor.
    pub low_ess_warning: bool,
}

impl ChainDiagnostics {
    pub(crate) fn from_draws<T: Real>(w: &[Vec<T>], alpha2: &[Vec<T>], sigma2: &[Vec<T>], ess_floor: f64) -> Self {
        let per_column = |rows: &[Vec<T>]| -> Vec<ParameterDiagnostics> {
            let width = rows.first().map_or(0, Vec::len);
            (0..width)
                .map(|j| {
                    let x: Vec<f64> = rows.iter().map(|r| r[j].as_f64()).collect();
                    ParameterDiagnostics {
                        ess: effective_sample_size(&x),
                        split_rhat: split_rhat(&x),
                    }
                })
                .collect()
        };
        let w = per_column(w);
        let low_ess_warning = w.iter().any(|d| d.ess.is_finite() && d.ess < ess_floor);
        Self {
            w,
            alpha2: per_column(alpha2),
            sigma2: per_column(sigma2),
            low_ess_warning,
        }
    }
}

fn halves(x: &[f64]) -> (&[f64], &[f64]) {
    let h = x.len() / 2;
    (&x[..h], &x[x.len() - h..])
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Biased (1/n) autocovariance at `lag`.
fn autocov(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    (0..n - lag).map(|i| (x[i] - m) * (x[i + lag] - m)).sum::<f64>() / n as f64
}

/// Split-chain potential scale reduction factor. NaN for constant chains
/// or fewer than four draws.
pub fn split_rhat(x: &[f64]) -> f64 {
    if x.len() < 4 {
        return f64::NAN;
    }
    let (a, b) = halves(x);
    let n = a.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let var = |c: &[f64], m: f64| c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    let w = 0.5 * (var(a, ma) + var(b, mb));
    let grand = 0.5 * (ma + mb);
    let b_over_n = (ma - grand).powi(2) + (mb - grand).powi(2);
    if !(w > 0.0) {
        return f64::NAN;
    }
    (((n - 1.0) / n * w + b_over_n) / w).sqrt()
}

/// Effective sample size from Geyer's initial monotone sequence over the
/// two split halves. NaN for constant chains or fewer than eight draws.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    if x.len() < 8 {
        return f64::NAN;
    }
    let (a, b) = halves(x);
    let n = a.len();
    let means = [mean(a), mean(b)];
    let acov = |t: usize| 0.5 * (autocov(a, means[0], t) + autocov(b, means[1], t));
    let acov0 = acov(0);
    let mean_var = acov0 * n as f64 / (n as f64 - 1.0);
    let grand = 0.5 * (means[0] + means[1]);
    let between = (means[0] - grand).powi(2) + (means[1] - grand).powi(2);
    let var_plus = mean_var * (n as f64 - 1.0) / n as f64 + between;
    if !(var_plus > 0.0) {
        return f64::NAN;
    }

    let rho = |t: usize| 1.0 - (mean_var - acov(t)) / var_plus;
    let mut rho_hat = vec![1.0, rho(1)];
    let mut s = 1;
    while s + 4 < n {
        let even = rho(s + 1);
        let odd = rho(s + 2);
        if even + odd < 0.0 {
            break;
        }
        rho_hat.push(even);
        rho_hat.push(odd);
        s += 2;
    }
    let max_s = s;
    // Monotone adjustment over consecutive pairs.
    let mut k = 1;
    while k + 2 < rho_hat.len() && k + 3 <= max_s {
        if rho_hat[k + 1] + rho_hat[k + 2] > rho_hat[k - 1] + rho_hat[k] {
            let avg = 0.5 * (rho_hat[k - 1] + rho_hat[k]);
            rho_hat[k + 1] = avg;
            rho_hat[k + 2] = avg;
        }
        k += 2;
    }
    let head: f64 = rho_hat.iter().take(max_s).sum();
    let tail = if rho_hat[max_s.min(rho_hat.len() - 1)] > 0.0 {
        rho_hat[max_s.min(rho_hat.len() - 1)]
    } else {
        0.0
    };
    // Caps ESS at S log10(S) for antithetic chains.
    let tau = (-1.0 + 2.0 * head + tail).max(1.0 / ((2 * n) as f64).log10());
    (2 * n) as f64 / tau
}
