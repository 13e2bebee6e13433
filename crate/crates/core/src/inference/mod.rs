//! Hierarchical sparse Bayesian regression shared across tasks.
//!
//! Model, for tasks `l = 1..L` and dictionary terms `m = 1..M`:
//!
//! ```text
//! r_l = ÿ_l - F_l / m_mass = D_l w + eps_l,   eps_l ~ N(0, sigma_l² I)
//! w_m ~ N(0, alpha_m²),  alpha_m² ~ InvGamma(a, b),  sigma_l² ~ Exp(lambda)
//! ```
//!
//! `w` and `alpha²` are shared by every task; each task carries its own
//! noise variance. A single task is simply `L = 1`.

mod conditionals;
pub mod diagnostics;
mod gibbs;
pub mod gig;
mod predict;

use serde::{Deserialize, Serialize};

use crate::dictionary::{build_design_matrix, BasisSpec, DesignMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::simulator::Dataset;

pub use conditionals::{
    sample_alpha2_conditional, sample_sigma2_conditional, sample_weights_conditional, weight_conditional,
    WeightConditional,
};
pub use diagnostics::{effective_sample_size, split_rhat, ChainDiagnostics, ParameterDiagnostics};
pub use gibbs::{run_gibbs, run_gibbs_single_task};
pub use predict::{predict_response, Prediction, WeightSource};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters<T> {
    /// Inverse-gamma shape for the weight variances.
    pub a: T,
    /// Inverse-gamma scale for the weight variances.
    pub b: T,
    /// Rate of the exponential prior on each noise variance.
    pub lambda: T,
}

impl<T: Real> Default for Hyperparameters<T> {
    fn default() -> Self {
        Self {
            a: T::lit(1e-3),
            b: T::lit(1e-3),
            lambda: T::one(),
        }
    }
}

impl<T: Real> Hyperparameters<T> {
    pub fn validate(&self) -> Result<()> {
        if self.a > T::zero() && self.b > T::zero() && self.lambda > T::zero() {
            Ok(())
        } else {
            Err(Error::config("hyperparameters a, b and lambda must all be positive"))
        }
    }
}

/// One task's regression data. The force is stored already divided by the
/// mass, so the regression target is `target - force`.
#[derive(Debug, Clone)]
pub struct TaskData<T> {
    design: DesignMatrix<T>,
    target: Vec<T>,
    force: Vec<T>,
    gram: Vec<T>,
    rhs: Vec<T>,
}

impl<T: Real> TaskData<T> {
    pub fn new(design: DesignMatrix<T>, target: Vec<T>, force: Vec<T>) -> Result<Self> {
        let n = design.n_rows();
        if target.len() != n || force.len() != n {
            return Err(Error::Dimension(format!(
                "design has {n} rows, target {} and force {}",
                target.len(),
                force.len()
            )));
        }
        if n == 0 {
            return Err(Error::EmptyRequest("task has no samples"));
        }
        if !crate::scalar::all_finite(&target) || !crate::scalar::all_finite(&force) {
            return Err(Error::config("task target or force contains non-finite values"));
        }
        let residual: Vec<T> = target.iter().zip(&force).map(|(&y, &f)| y - f).collect();
        let gram = design.gram();
        let rhs = design.tr_mul_vec(&residual);
        Ok(Self { design, target, force, gram, rhs })
    }

    /// Builds the task from a dataset: target `ÿ`, force `F / mass`.
    pub fn from_dataset(data: &Dataset<T>, basis: &BasisSpec, mass: T) -> Result<Self> {
        if !(mass > T::zero()) {
            return Err(Error::config("mass must be positive"));
        }
        let design = build_design_matrix(data, basis)?;
        let force = data.force.iter().map(|&f| f / mass).collect();
        Self::new(design, data.yddot.clone(), force)
    }

    pub fn design(&self) -> &DesignMatrix<T> {
        &self.design
    }

    pub fn target(&self) -> &[T] {
        &self.target
    }

    pub fn force(&self) -> &[T] {
        &self.force
    }

    pub fn n_samples(&self) -> usize {
        self.target.len()
    }

    pub fn n_terms(&self) -> usize {
        self.design.n_cols()
    }

    pub fn label(&self) -> &str {
        &self.design.task_label
    }

    /// `DᵀD`, row-major.
    pub fn gram(&self) -> &[T] {
        &self.gram
    }

    /// `Dᵀ(y - F)`.
    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    /// `‖y - F - D w‖²`.
    pub fn sse(&self, w: &[T]) -> T {
        let m = self.n_terms();
        (0..self.n_samples())
            .map(|i| {
                let row = self.design.row(i);
                let mut pred = self.force[i];
                for j in 0..m {
                    pred = pred + row[j] * w[j];
                }
                let r = self.target[i] - pred;
                r * r
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    #[default]
    Ridge,
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig<T> {
    pub n_iterations: usize,
    pub n_burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    #[serde(default)]
    pub init_strategy: InitStrategy,
    /// Lower bound on every noise-variance draw.
    pub sigma2_floor: T,
    /// Effective sample size below which the diagnostics raise a warning.
    pub ess_floor: T,
    /// Hold the weight variances fixed instead of sampling them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_alpha2: Option<Vec<T>>,
    /// Hold the per-task noise variances fixed instead of sampling them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_sigma2: Option<Vec<T>>,
}

impl<T: Real> Default for ChainConfig<T> {
    fn default() -> Self {
        Self {
            n_iterations: 4000,
            n_burn_in: 2000,
            thinning: 1,
            seed: 0,
            init_strategy: InitStrategy::Ridge,
            sigma2_floor: T::lit(1e-12),
            ess_floor: T::lit(100.0),
            fixed_alpha2: None,
            fixed_sigma2: None,
        }
    }
}

impl<T: Real> ChainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_burn_in >= self.n_iterations {
            return Err(Error::config("burn-in must be shorter than the chain"));
        }
        if self.thinning == 0 {
            return Err(Error::config("thinning must be at least 1"));
        }
        if self.n_samples() == 0 {
            return Err(Error::config("chain retains no draws after burn-in and thinning"));
        }
        if !(self.sigma2_floor >= T::zero()) {
            return Err(Error::config("sigma2 floor must be non-negative"));
        }
        Ok(())
    }

    /// Retained draws, `(n_iterations - n_burn_in) / thinning`.
    pub fn n_samples(&self) -> usize {
        (self.n_iterations.saturating_sub(self.n_burn_in)) / self.thinning.max(1)
    }
}

/// Retained Gibbs draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain<T> {
    pub basis: BasisSpec,
    pub task_labels: Vec<String>,
    /// `S x M` weight draws, shared by all tasks.
    pub w_draws: Vec<Vec<T>>,
    /// `S x M` weight-variance draws.
    pub alpha2_draws: Vec<Vec<T>>,
    /// `S x L` noise-variance draws.
    pub sigma2_draws: Vec<Vec<T>>,
    pub diagnostics: ChainDiagnostics,
}

impl<T: Real> PosteriorChain<T> {
    pub fn n_draws(&self) -> usize {
        self.w_draws.len()
    }

    pub fn n_terms(&self) -> usize {
        self.basis.len()
    }

    pub fn n_tasks(&self) -> usize {
        self.task_labels.len()
    }

    pub fn posterior_mean_w(&self) -> Vec<T> {
        column_means(&self.w_draws, self.n_terms())
    }

    pub fn posterior_mean_sigma2(&self) -> Vec<T> {
        column_means(&self.sigma2_draws, self.n_tasks())
    }

    /// Draws of one weight across iterations.
    pub fn w_trace(&self, term: usize) -> Vec<T> {
        self.w_draws.iter().map(|d| d[term]).collect()
    }
}

pub(crate) fn column_means<T: Real>(rows: &[Vec<T>], width: usize) -> Vec<T> {
    let mut acc = vec![T::zero(); width];
    for r in rows {
        for (a, &v) in acc.iter_mut().zip(r) {
            *a = *a + v;
        }
    }
    let n = T::from_usize_lossy(rows.len().max(1));
    acc.into_iter().map(|a| a / n).collect()
}
