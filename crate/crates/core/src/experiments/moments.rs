//! Monitoring of the largest normalized aggregate weight.

use rayon::prelude::*;

use super::{track, EngineConfig, ExperimentError};
use crate::model::TrackingModel;
use crate::rng::SeedPlan;

/// Constants of the moment bound `E[(max_m W(m))^q] <= c^q / M^(q - epsilon)`
/// together with the experiment it is checked on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionCheckParams {
    pub c: f64,
    pub q: f64,
    pub epsilon: f64,
    pub m_pes: usize,
    pub exchange_period: usize,
    pub runs: usize,
}

impl AssumptionCheckParams {
    /// `c = 4, q = 4, epsilon = 0.5`.
    pub fn standard(m_pes: usize, exchange_period: usize, runs: usize) -> Self {
        Self {
            c: 4.0,
            q: 4.0,
            epsilon: 0.5,
            m_pes,
            exchange_period,
            runs,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::InvalidParameter(msg));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !(self.q >= 4.0 && self.q.is_finite()) {
            return bad(format!("q must be at least 4, got {}", self.q));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [0, 1), got {}", self.epsilon));
        }
        if self.m_pes == 0 || self.exchange_period == 0 {
            return bad("M and n0 must be at least 1".into());
        }
        Ok(())
    }
}

/// `c^q / M^(q - epsilon)`.
pub fn assumption_bound(params: &AssumptionCheckParams) -> f64 {
    params.c.powf(params.q) / (params.m_pes as f64).powf(params.q - params.epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupMomentRow {
    pub n: usize,
    pub is_exchange_step: bool,
    pub moment_estimate: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupMomentSeries {
    pub rows: Vec<SupMomentRow>,
    pub runs: usize,
}

impl SupMomentSeries {
    pub fn exchange_rows(&self) -> impl Iterator<Item = &SupMomentRow> {
        self.rows.iter().filter(|r| r.is_exchange_step)
    }

    /// Exchange steps at which the estimate is not below the bound.
    pub fn violations(&self) -> Vec<usize> {
        self.exchange_rows()
            .filter(|r| r.moment_estimate.partial_cmp(&r.bound) != Some(std::cmp::Ordering::Less))
            .map(|r| r.n)
            .collect()
    }

    /// The bound holds at every exchange step (between exchanges it need not).
    pub fn passes(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn worst_exchange_ratio(&self) -> f64 {
        self.exchange_rows()
            .map(|r| r.moment_estimate / r.bound)
            .fold(0.0, f64::max)
    }
}

/// Averages `(max_m W(m))^q` over independent runs for `n = 0..=horizon`.
pub fn estimate_sup_moment(
    model: &TrackingModel,
    config: &EngineConfig,
    horizon: usize,
    params: &AssumptionCheckParams,
    plan: &SeedPlan,
) -> Result<SupMomentSeries, ExperimentError> {
    params.validate()?;
    if params.runs < 2 {
        return Err(ExperimentError::InvalidParameter(format!(
            "need at least 2 runs, got {}",
            params.runs
        )));
    }
    if config.m_pes != params.m_pes || config.exchange_period != params.exchange_period {
        return Err(ExperimentError::InvalidParameter(
            "filter and bound disagree on M or n0".into(),
        ));
    }
    let map = config.exchange_map()?;
    let per_run: Vec<Vec<f64>> = (0..params.runs as u64)
        .into_par_iter()
        .map(|run| {
            let traj = model.simulate_trajectory(horizon, &mut plan.trajectory(run));
            let records = track(model, config, &map, &traj.observations, plan, run)?;
            Ok(records
                .iter()
                .map(|r| r.sup_aggregate.powf(params.q))
                .collect())
        })
        .collect::<Result<_, ExperimentError>>()?;

    let bound = assumption_bound(params);
    let mut rows = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let total: f64 = per_run.iter().map(|v| v[n]).sum();
        rows.push(SupMomentRow {
            n,
            is_exchange_step: n > 0 && n % params.exchange_period == 0,
            moment_estimate: total / params.runs as f64,
            bound,
        });
    }
    Ok(SupMomentSeries {
        rows,
        runs: params.runs,
    })
}
