use serde::{Deserialize, Serialize};

use super::{PosteriorChain, TaskData};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Where prediction weights come from.
#[derive(Debug, Clone, Copy)]
pub enum WeightSource<'a, T> {
    Chain(&'a PosteriorChain<T>),
    Point(&'a [T]),
}

/// Predicted acceleration with a pointwise 95% credible band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T> {
    pub mean: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

/// `D ŵ + F` with `ŵ` the posterior mean, plus 2.5%/97.5% quantiles of the
/// per-draw predictions `D w_s + F`.
pub fn predict_response<T: Real>(source: WeightSource<'_, T>, task: &TaskData<T>) -> Result<Prediction<T>> {
    let m = task.n_terms();
    let predict = |w: &[T]| -> Vec<T> {
        task.design()
            .mul_vec(w)
            .into_iter()
            .zip(task.force())
            .map(|(dw, &f)| dw + f)
            .collect()
    };
    match source {
        WeightSource::Point(w) => {
            if w.len() != m {
                return Err(Error::Dimension(format!("{} weights for {m} terms", w.len())));
            }
            let mean = predict(w);
            Ok(Prediction { lower: mean.clone(), upper: mean.clone(), mean })
        }
        WeightSource::Chain(chain) => {
            if chain.n_terms() != m {
                return Err(Error::Dimension(format!("chain has {} terms, task {m}", chain.n_terms())));
            }
            if chain.n_draws() == 0 {
                return Err(Error::EmptyRequest("chain holds no draws"));
            }
            let mean = predict(&chain.posterior_mean_w());
            let per_draw: Vec<Vec<T>> = chain.w_draws.iter().map(|w| predict(w)).collect();
            let n = task.n_samples();
            let mut lower = Vec::with_capacity(n);
            let mut upper = Vec::with_capacity(n);
            let mut column = vec![T::zero(); per_draw.len()];
            for i in 0..n {
                for (c, d) in column.iter_mut().zip(&per_draw) {
                    *c = d[i];
                }
                column.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                lower.push(crate::evaluation::quantile_sorted(&column, 0.025));
                upper.push(crate::evaluation::quantile_sorted(&column, 0.975));
            }
            Ok(Prediction { mean, lower, upper })
        }
    }
}
