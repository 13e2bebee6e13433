//! Bayesian sparse equation discovery for forced nonlinear oscillators.
//!
//! The pipeline simulates a Duffing-type oscillator under scaled random
//! forcing ([`simulator`], [`signals`]), evaluates a dictionary of candidate
//! terms ([`dictionary`]), and infers sparse weights with a relevance-vector
//! style hierarchical model sampled by Gibbs ([`inference`]). Several
//! datasets can be fitted jointly: they share the weights and keep their own
//! noise variances. [`evaluation`] turns posteriors into NMSE and
//! parameter-recovery summaries.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dictionary;
pub mod error;
pub mod evaluation;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod signals;
pub mod simulator;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Dataset = simulator::Dataset<f64>;
pub type OscillatorParams = simulator::OscillatorParams<f64>;
pub type SimulationConfig = simulator::SimulationConfig<f64>;
pub type ForcingSpec = signals::ForcingSpec<f64>;
pub type FilterSpec = signals::FilterSpec<f64>;
pub type DesignMatrix = dictionary::DesignMatrix<f64>;
pub type TaskData = inference::TaskData<f64>;
pub type Hyperparameters = inference::Hyperparameters<f64>;
pub type ChainConfig = inference::ChainConfig<f64>;
pub type PosteriorChain = inference::PosteriorChain<f64>;
pub type PosteriorSummary = evaluation::PosteriorSummary<f64>;
pub type RecoveryReport = evaluation::RecoveryReport<f64>;
pub type NmseResult = evaluation::NmseResult<f64>;

pub type Dataset32 = simulator::Dataset<f32>;
pub type OscillatorParams32 = simulator::OscillatorParams<f32>;
pub type TaskData32 = inference::TaskData<f32>;
