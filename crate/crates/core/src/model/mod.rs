//! State-space models.
//!
//! A model is a triplet of prior, Markov transition kernel and likelihood.
//! The filter engine only needs to sample the first two and evaluate the
//! third in log domain; [`StateSpaceModel`] captures exactly that.

mod hmm;
mod tracking;

pub use hmm::{DiscreteHmmModel, HmmTrace};
pub use tracking::{
    load_sensor_layout, Observation, Region, StateVector, TrackingModel, TrackingModelParams,
    Trajectory,
};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("observation has {got} entries, model expects {expected}")]
    ObservationLength { expected: usize, got: usize },
    #[error("observation entry {index} is {value}, expected 0 or 1")]
    InvalidBit { index: usize, value: u8 },
    #[error("observation symbol {symbol} out of range (model has {symbols} symbols)")]
    InvalidSymbol { symbol: usize, symbols: usize },
    #[error("state position ({x}, {y}) lies outside the region")]
    OutsideRegion { x: f64, y: f64 },
    #[error("sensor layout: {0}")]
    SensorLayout(String),
}

/// Sampling and likelihood interface consumed by the filter engine.
///
/// Implementations must be immutable during filtering; every method that
/// draws randomness uses only the stream it is handed.
pub trait StateSpaceModel: Sync {
    type State: Clone + Send + Sync;
    type Observation: ?Sized + Sync;

    /// Rejects observations the likelihood cannot be evaluated on.
    fn check_observation(&self, _y: &Self::Observation) -> Result<(), ModelError> {
        Ok(())
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn sample_next<R: Rng + ?Sized>(&self, prev: &Self::State, rng: &mut R) -> Self::State;

    /// `log g(y | x)`. May be `-inf` for models without a lower likelihood bound.
    fn log_likelihood_of(&self, x: &Self::State, y: &Self::Observation) -> f64;
}

/// States that can be projected onto real coordinates for mean estimates.
pub trait Coordinates {
    const DIM: usize;
    fn coordinate(&self, axis: usize) -> f64;
}

impl Coordinates for f64 {
    const DIM: usize = 1;
    fn coordinate(&self, _axis: usize) -> f64 {
        *self
    }
}
