//! Monte Carlo studies on the tracking model and the discrete oracle model.
//!
//! Every run `r` simulates its own trajectory from the trajectory stream of
//! `r` and filters it with PE streams tagged by the filter configuration, so
//! different filters evaluated on the same run see the same data but never
//! share randomness. Runs execute in parallel; reductions are ordered by run
//! index.

mod errors;
mod moments;
mod oracle_check;
pub mod output;
mod rate;

pub use errors::{
    l2_error_series, proxy_reference, ErrorNorm, ErrorSeries, Reference, ReferenceKind,
};
pub use moments::{
    assumption_bound, estimate_sup_moment, AssumptionCheckParams, SupMomentRow, SupMomentSeries,
};
pub use oracle_check::{oracle_convergence, oracle_test_model, OracleCheckRow};
pub use rate::{fit_rate, rate_sweep, RateFitResult, RateReading, RateSweepConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run_filter, EngineError, FilterState, StepRecord};
use crate::model::{Observation, TrackingModel};
use crate::oracle::OracleError;
use crate::rng::{mix, SeedPlan};
use crate::topology::{build_exchange_map, ExchangeMap, TopologyError, TopologyKind};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment parameter: {0}")]
    InvalidParameter(String),
    #[error("reference has {got} entries, expected {expected}")]
    ReferenceLength { expected: usize, got: usize },
    #[error("rate fit needs at least 2 distinct PE counts, got {0}")]
    DegenerateDesign(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Shape of one distributed filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub m_pes: usize,
    pub k_per_pe: usize,
    pub exchange_period: usize,
    pub topology: TopologyKind,
    /// Particles swapped per neighbor; `None` uses the ~90% default.
    pub per_neighbor: Option<usize>,
}

impl EngineConfig {
    pub fn new(m_pes: usize, k_per_pe: usize, exchange_period: usize) -> Self {
        Self {
            m_pes,
            k_per_pe,
            exchange_period,
            topology: TopologyKind::HavelHakimi,
            per_neighbor: None,
        }
    }

    /// Single-PE bootstrap filter with `n_particles` particles.
    pub fn centralized(n_particles: usize) -> Self {
        Self::new(1, n_particles, 1)
    }

    pub fn total_particles(&self) -> usize {
        self.m_pes * self.k_per_pe
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.m_pes == 0 || self.k_per_pe == 0 || self.exchange_period == 0 {
            return Err(ExperimentError::InvalidParameter(format!(
                "M, K and n0 must be at least 1, got M = {}, K = {}, n0 = {}",
                self.m_pes, self.k_per_pe, self.exchange_period
            )));
        }
        Ok(())
    }

    pub fn exchange_map(&self) -> Result<ExchangeMap, ExperimentError> {
        self.validate()?;
        Ok(build_exchange_map(
            self.topology,
            self.m_pes,
            self.k_per_pe,
            self.per_neighbor,
        )?)
    }

    /// Stream tag identifying this filter within a run.
    pub fn stream_tag(&self) -> u32 {
        mix(
            self.m_pes as u64,
            self.k_per_pe as u64,
            self.exchange_period as u64,
        ) as u32
    }
}

/// Runs one filter over `observations` and returns the per-step telemetry,
/// starting with the initial state at step 0.
pub fn track(
    model: &TrackingModel,
    config: &EngineConfig,
    map: &ExchangeMap,
    observations: &[Observation],
    plan: &SeedPlan,
    run: u64,
) -> Result<Vec<StepRecord>, ExperimentError> {
    let mut streams = plan.pe_streams(run, config.stream_tag(), config.m_pes);
    let mut state = FilterState::init(
        model,
        config.k_per_pe,
        config.exchange_period,
        map.clone(),
        &mut streams,
    )?;
    let mut records = Vec::with_capacity(observations.len() + 1);
    run_filter(model, &mut state, &mut streams, observations, &mut records)?;
    Ok(records)
}
