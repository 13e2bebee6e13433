//! Full conditionals of the shared-weight model.

use rand::Rng;

use super::gig::{sample_gig, sample_inverse_gamma};
use super::{Hyperparameters, TaskData};
use crate::error::{Error, Result};
use crate::linalg::{back_substitute_transposed, cholesky, cholesky_inverse, cholesky_solve};
use crate::scalar::Real;

const JITTER_ATTEMPTS: usize = 4;

/// Gaussian full conditional of `w`.
#[derive(Debug, Clone)]
pub struct WeightConditional<T> {
    pub mean: Vec<T>,
    /// Lower Cholesky factor of the precision matrix, row-major.
    pub precision_factor: Vec<T>,
    dim: usize,
}

impl<T: Real> WeightConditional<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Posterior covariance (inverse precision), symmetrised.
    pub fn covariance(&self) -> Vec<T> {
        cholesky_inverse(&self.precision_factor, self.dim)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let mut z: Vec<T> = (0..self.dim).map(|_| T::standard_normal(rng)).collect();
        back_substitute_transposed(&self.precision_factor, self.dim, &mut z);
        self.mean.iter().zip(&z).map(|(&m, &e)| m + e).collect()
    }
}

fn check_dims<T: Real>(tasks: &[TaskData<T>], alpha2: &[T], sigma2: &[T]) -> Result<usize> {
    let first = tasks.first().ok_or(Error::EmptyRequest("no tasks supplied"))?;
    let m = first.n_terms();
    if tasks.iter().any(|t| t.n_terms() != m) {
        return Err(Error::Dimension("tasks have different dictionary sizes".into()));
    }
    if alpha2.len() != m {
        return Err(Error::Dimension(format!("alpha2 has {} entries, expected {m}", alpha2.len())));
    }
    if sigma2.len() != tasks.len() {
        return Err(Error::Dimension(format!(
            "sigma2 has {} entries, expected {}",
            sigma2.len(),
            tasks.len()
        )));
    }
    if alpha2.iter().chain(sigma2).any(|&v| !(v > T::zero())) {
        return Err(Error::config("variances must be strictly positive"));
    }
    Ok(m)
}

/// Precision `Σ_l D_lᵀD_l / σ_l² + diag(1/α²)` and mean of `w` given the
/// variances.
pub fn weight_conditional<T: Real>(
    tasks: &[TaskData<T>],
    alpha2: &[T],
    sigma2: &[T],
) -> Result<WeightConditional<T>> {
    let m = check_dims(tasks, alpha2, sigma2)?;
    let mut precision = vec![T::zero(); m * m];
    let mut h = vec![T::zero(); m];
    for (task, &s2) in tasks.iter().zip(sigma2) {
        let inv = T::one() / s2;
        for (p, &g) in precision.iter_mut().zip(task.gram()) {
            *p = *p + g * inv;
        }
        for (hv, &r) in h.iter_mut().zip(task.rhs()) {
            *hv = *hv + r * inv;
        }
    }
    for j in 0..m {
        precision[j * m + j] = precision[j * m + j] + T::one() / alpha2[j];
    }

    let scale = (0..m).map(|j| precision[j * m + j].abs()).sum::<T>() / T::from_usize_lossy(m);
    let mut jittered = precision.clone();
    for attempt in 0..=JITTER_ATTEMPTS {
        if attempt > 0 {
            let eps = scale * T::lit(1e-12) * T::lit(10f64.powi(2 * (attempt as i32 - 1)));
            for j in 0..m {
                jittered[j * m + j] = precision[j * m + j] + eps;
            }
        }
        if let Some(l) = cholesky(&jittered, m) {
            let mean = cholesky_solve(&l, m, &h);
            if mean.iter().all(|v| v.is_finite()) {
                return Ok(WeightConditional { mean, precision_factor: l, dim: m });
            }
        }
    }
    Err(Error::NotPositiveDefinite { attempts: JITTER_ATTEMPTS })
}

/// Draws `w ~ N(μ, Σ)` from its Gaussian full conditional.
pub fn sample_weights_conditional<T: Real, R: Rng + ?Sized>(
    tasks: &[TaskData<T>],
    alpha2: &[T],
    sigma2: &[T],
    rng: &mut R,
) -> Result<Vec<T>> {
    Ok(weight_conditional(tasks, alpha2, sigma2)?.sample(rng))
}

/// Independently per term, `α_m² ~ InvGamma(a + 1/2, b + w_m²/2)`.
pub fn sample_alpha2_conditional<T: Real, R: Rng + ?Sized>(
    w: &[T],
    hyper: &Hyperparameters<T>,
    rng: &mut R,
) -> Result<Vec<T>> {
    hyper.validate()?;
    let half = T::lit(0.5);
    Ok(w
        .iter()
        .map(|&wm| sample_inverse_gamma(hyper.a + half, hyper.b + half * wm * wm, rng))
        .collect())
}

/// `σ_l² ~ GIG(1 - N_l/2, SSE, 2λ)`, the conditional under an exponential
/// prior and Gaussian likelihood.
pub fn sample_sigma2_conditional<T: Real, R: Rng + ?Sized>(
    task: &TaskData<T>,
    w: &[T],
    hyper: &Hyperparameters<T>,
    rng: &mut R,
) -> Result<T> {
    hyper.validate()?;
    if w.len() != task.n_terms() {
        return Err(Error::Dimension(format!(
            "weight vector has {} entries, task has {} terms",
            w.len(),
            task.n_terms()
        )));
    }
    let n = task.n_samples();
    let sse = task.sse(w);
    if !sse.is_finite() {
        return Err(Error::config("residual sum of squares is not finite"));
    }
    if sse <= T::zero() && n > 2 {
        return Err(Error::DegenerateNoise { n });
    }
    let p = T::one() - T::from_usize_lossy(n) * T::lit(0.5);
    Ok(sample_gig(p, sse, T::lit(2.0) * hyper.lambda, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{BasisSpec, DesignMatrix};
    use crate::rng::rng_from_seed;

    fn toy_task(n: usize) -> TaskData<f64> {
        let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.21).cos()).collect();
        let basis = BasisSpec::from_labels(&["y", "ydot", "1"]).unwrap();
        let d = DesignMatrix::from_states(&y, &v, &basis, "toy").unwrap();
        let target: Vec<f64> = (0..n).map(|i| 0.5 * y[i] - 2.0 * v[i] + 0.1 * (i as f64).cos()).collect();
        TaskData::new(d, target, vec![0.0; n]).unwrap()
    }

    #[test]
    fn covariance_is_symmetric() {
        let t = toy_task(50);
        let c = weight_conditional(&[t], &[1.0, 2.0, 0.5], &[0.3]).unwrap();
        let s = c.covariance();
        for i in 0..3 {
            for j in 0..3 {
                assert!((s[i * 3 + j] - s[j * 3 + i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tiny_alpha_pins_weights_at_zero() {
        let t = toy_task(50);
        let mut rng = rng_from_seed(0);
        let w = sample_weights_conditional(&[t], &[1e-300; 3], &[1.0], &mut rng).unwrap();
        assert!(w.iter().all(|v| v.abs() < 1e-100));
    }

    #[test]
    fn dimension_errors() {
        let t = toy_task(10);
        let mut rng = rng_from_seed(0);
        assert!(sample_weights_conditional(std::slice::from_ref(&t), &[1.0; 2], &[1.0], &mut rng).is_err());
        assert!(sample_weights_conditional(std::slice::from_ref(&t), &[1.0; 3], &[1.0, 1.0], &mut rng).is_err());
        assert!(sample_weights_conditional(std::slice::from_ref(&t), &[1.0, 0.0, 1.0], &[1.0], &mut rng).is_err());
        assert!(sample_weights_conditional::<f64, _>(&[], &[], &[], &mut rng).is_err());
        assert!(sample_sigma2_conditional(&t, &[0.0; 2], &Hyperparameters::default(), &mut rng).is_err());
    }

    #[test]
    fn zero_residual_is_degenerate() {
        let basis = BasisSpec::from_labels(&["y"]).unwrap();
        let y = [1.0, 2.0, 3.0, 4.0];
        let d = DesignMatrix::from_states(&y, &y, &basis, "exact").unwrap();
        let task = TaskData::new(d, vec![2.0, 4.0, 6.0, 8.0], vec![0.0; 4]).unwrap();
        let mut rng = rng_from_seed(0);
        let err = sample_sigma2_conditional(&task, &[2.0], &Hyperparameters::default(), &mut rng).unwrap_err();
        assert!(matches!(err, Error::DegenerateNoise { n: 4 }));
    }

    #[test]
    fn alpha2_draws_positive() {
        let mut rng = rng_from_seed(5);
        let h = Hyperparameters { a: 1e-3, b: 1e-3, lambda: 1.0 };
        for _ in 0..1000 {
            let a = sample_alpha2_conditional(&[0.0f64, 1e-8, 3.0], &h, &mut rng).unwrap();
            assert!(a.iter().all(|&v| v > 0.0 && v.is_finite()));
        }
    }
}
