//! Trajectory-based exploratory landscape analysis for fixed-budget
//! performance prediction of CMA-ES.
//!
//! The numerical core is generic over a [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root pin the `f64` variants used by the experiment
//! harness.

pub mod bbob;
pub mod cmaes;
pub mod ela;
mod error;
pub mod forest;
pub mod linalg;
pub mod rng;
mod scalar;
pub mod selection;
pub mod selector;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Instance = bbob::ProblemInstance<f64>;
pub type Instance32 = bbob::ProblemInstance<f32>;
pub type CmaEs = cmaes::CmaState<f64>;
pub type CmaEs32 = cmaes::CmaState<f32>;
pub type Trajectory = cmaes::Trajectory<f64>;
pub type Snapshot = state::CmaStateSnapshot<f64>;
pub type Samples = ela::SampleSet<f64>;
pub type Samples32 = ela::SampleSet<f32>;
pub type Features = ela::FeatureVector<f64>;
pub type TrainingData = forest::TrainingSet<f64>;
pub type Forest = forest::RandomForestModel<f64>;
pub type Forest32 = forest::RandomForestModel<f32>;
pub type Selector = selector::SelectorModel<f64>;
pub type Prediction = selector::PredictionRecord<f64>;
