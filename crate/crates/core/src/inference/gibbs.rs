use super::conditionals::{sample_alpha2_conditional, weight_conditional};
use super::diagnostics::ChainDiagnostics;
use super::gig::sample_gig;
use super::{ChainConfig, Hyperparameters, InitStrategy, PosteriorChain, TaskData};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

struct State<T> {
    w: Vec<T>,
    alpha2: Vec<T>,
    sigma2: Vec<T>,
}

fn initial_state<T: Real>(tasks: &[TaskData<T>], config: &ChainConfig<T>) -> Result<State<T>> {
    let m = tasks[0].n_terms();
    let floor = config.sigma2_floor;
    let state = match config.init_strategy {
        InitStrategy::Ridge => {
            // Unit ridge on the pooled normal equations.
            let mut g = vec![T::zero(); m * m];
            let mut h = vec![T::zero(); m];
            for t in tasks {
                g.iter_mut().zip(t.gram()).for_each(|(a, &b)| *a = *a + b);
                h.iter_mut().zip(t.rhs()).for_each(|(a, &b)| *a = *a + b);
            }
            for j in 0..m {
                g[j * m + j] = g[j * m + j] + T::one();
            }
            let l = cholesky(&g, m).ok_or(Error::NotPositiveDefinite { attempts: 0 })?;
            let w = cholesky_solve(&l, m, &h);
            let alpha2 = w.iter().map(|&v| (v * v).max(T::lit(1e-6))).collect();
            let sigma2 = tasks
                .iter()
                .map(|t| (t.sse(&w) / T::from_usize_lossy(t.n_samples())).max(floor))
                .collect();
            State { w, alpha2, sigma2 }
        }
        InitStrategy::Zeros => {
            let w = vec![T::zero(); m];
            let sigma2 = tasks
                .iter()
                .map(|t| {
                    let r: Vec<T> = t.target().iter().zip(t.force()).map(|(&y, &f)| y - f).collect();
                    crate::scalar::population_variance(&r).max(floor)
                })
                .collect();
            State { w, alpha2: vec![T::one(); m], sigma2 }
        }
    };
    Ok(State {
        alpha2: config.fixed_alpha2.clone().unwrap_or(state.alpha2),
        sigma2: config.fixed_sigma2.clone().unwrap_or(state.sigma2),
        ..state
    })
}

/// Blocked Gibbs sampler cycling `w | α², σ²`, `α² | w`, `σ_l² | w`.
///
/// Every task shares `w` and `α²`; each keeps its own `σ_l²`. Noise draws are
/// floored at `config.sigma2_floor`, which also replaces the draw when a
/// task's residual vanishes entirely.
pub fn run_gibbs<T: Real>(
    tasks: &[TaskData<T>],
    hyper: &Hyperparameters<T>,
    config: &ChainConfig<T>,
) -> Result<PosteriorChain<T>> {
    if tasks.is_empty() {
        return Err(Error::EmptyRequest("no tasks supplied"));
    }
    hyper.validate()?;
    config.validate()?;
    let basis = tasks[0].design().basis().clone();
    if tasks.iter().any(|t| *t.design().basis() != basis) {
        return Err(Error::Dimension("tasks use different dictionaries".into()));
    }
    let m = basis.len();
    if let Some(a) = &config.fixed_alpha2 {
        if a.len() != m || a.iter().any(|&v| !(v > T::zero())) {
            return Err(Error::config("fixed alpha2 must hold one positive value per term"));
        }
    }
    if let Some(s) = &config.fixed_sigma2 {
        if s.len() != tasks.len() || s.iter().any(|&v| !(v > T::zero())) {
            return Err(Error::config("fixed sigma2 must hold one positive value per task"));
        }
    }

    let mut rng = rng_from_seed(config.seed);
    let mut state = initial_state(tasks, config)?;
    let keep = config.n_samples();
    let mut w_draws = Vec::with_capacity(keep);
    let mut alpha2_draws = Vec::with_capacity(keep);
    let mut sigma2_draws = Vec::with_capacity(keep);
    let two_lambda = T::lit(2.0) * hyper.lambda;

    for it in 0..config.n_iterations {
        state.w = weight_conditional(tasks, &state.alpha2, &state.sigma2)?.sample(&mut rng);
        if state.w.iter().any(|v| !v.is_finite()) {
            return Err(Error::ChainDiverged { iteration: it, parameter: "w" });
        }

        if config.fixed_alpha2.is_none() {
            state.alpha2 = sample_alpha2_conditional(&state.w, hyper, &mut rng)?;
            if state.alpha2.iter().any(|v| !(v.is_finite() && *v > T::zero())) {
                return Err(Error::ChainDiverged { iteration: it, parameter: "alpha2" });
            }
        }

        if config.fixed_sigma2.is_none() {
            for (s2, task) in state.sigma2.iter_mut().zip(tasks) {
                let sse = task.sse(&state.w);
                let p = T::one() - T::from_usize_lossy(task.n_samples()) * T::lit(0.5);
                let draw = if sse > T::zero() {
                    sample_gig(p, sse, two_lambda, &mut rng)
                } else {
                    config.sigma2_floor
                };
                if !draw.is_finite() {
                    return Err(Error::ChainDiverged { iteration: it, parameter: "sigma2" });
                }
                *s2 = draw.max(config.sigma2_floor);
                if !(*s2 > T::zero()) {
                    return Err(Error::DegenerateNoise { n: task.n_samples() });
                }
            }
        }

        if it >= config.n_burn_in && (it - config.n_burn_in + 1).is_multiple_of(config.thinning) && w_draws.len() < keep {
            w_draws.push(state.w.clone());
            alpha2_draws.push(state.alpha2.clone());
            sigma2_draws.push(state.sigma2.clone());
        }
    }

    let diagnostics = ChainDiagnostics::from_draws(&w_draws, &alpha2_draws, &sigma2_draws, config.ess_floor.as_f64());
    Ok(PosteriorChain {
        basis,
        task_labels: tasks.iter().map(|t| t.label().to_string()).collect(),
        w_draws,
        alpha2_draws,
        sigma2_draws,
        diagnostics,
    })
}

/// The single-task model, i.e. [`run_gibbs`] with one task.
pub fn run_gibbs_single_task<T: Real>(
    task: &TaskData<T>,
    hyper: &Hyperparameters<T>,
    config: &ChainConfig<T>,
) -> Result<PosteriorChain<T>> {
    run_gibbs(std::slice::from_ref(task), hyper, config)
}
