//! Distributed particle filtering with local resampling and periodic
//! particle exchange between processing elements (PEs).
//!
//! The crate is organised bottom up:
//!
//! - [`model`]: the state-space model trait, the binary-sensor tracking
//!   model and a finite-state hidden Markov model.
//! - [`topology`]: PE graphs and particle exchange maps.
//! - [`engine`]: the distributed filter recursion.
//! - [`oracle`]: exact forward filtering for finite-state models.
//! - [`experiments`]: Monte Carlo studies and their CSV outputs.
//! - [`cli`]: the `drna` command-line front end.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod cli;
pub mod engine;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod topology;

pub use engine::{EngineError, FilterState, PeEnsemble, StepRecord, WeightedSampleSet};
pub use model::{DiscreteHmmModel, StateSpaceModel, TrackingModel, TrackingModelParams};
pub use rng::SeedPlan;
pub use topology::{ExchangeMap, PeGraph, TopologyKind};
