//! L2 errors of posterior-mean estimates over time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{track, EngineConfig, ExperimentError};
use crate::model::{Observation, StateVector, TrackingModel};
use crate::rng::SeedPlan;

/// Which state components enter the error norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorNorm {
    #[default]
    Position,
    FullState,
}

impl ErrorNorm {
    fn dims(self) -> usize {
        match self {
            ErrorNorm::Position => 2,
            ErrorNorm::FullState => 4,
        }
    }

    pub fn squared_distance(self, estimate: &[f64], reference: &[f64; 4]) -> f64 {
        (0..self.dims())
            .map(|i| (estimate[i] - reference[i]).powi(2))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    TrueState,
    ProxyPosteriorMean,
}

impl ReferenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceKind::TrueState => "true-state",
            ReferenceKind::ProxyPosteriorMean => "proxy-posterior-mean",
        }
    }
}

/// What estimates are compared against. Proxy sequences are indexed
/// `[run][n - 1]` and must come from the same runs' trajectories.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    TrueState,
    Proxy(&'a [Vec<[f64; 4]>]),
}

impl Reference<'_> {
    pub fn kind(&self) -> ReferenceKind {
        match self {
            Reference::TrueState => ReferenceKind::TrueState,
            Reference::Proxy(_) => ReferenceKind::ProxyPosteriorMean,
        }
    }
}

/// `errors[n - 1] = sqrt(mean_runs |x_hat_n - ref_n|^2)` for `n = 1..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub errors: Vec<f64>,
    pub m_pes: usize,
    pub k_per_pe: usize,
    pub runs: usize,
    pub reference: ReferenceKind,
    /// Time-averaged squared error per run, in run order.
    pub per_run_mse: Vec<f64>,
}

impl ErrorSeries {
    pub fn horizon(&self) -> usize {
        self.errors.len()
    }

    pub fn at(&self, n: usize) -> f64 {
        self.errors[n - 1]
    }

    pub fn mean(&self) -> f64 {
        self.errors.iter().sum::<f64>() / self.errors.len() as f64
    }

    /// Least-squares slope of `error(n)` over `n` in `first..=last`.
    pub fn slope(&self, first: usize, last: usize) -> f64 {
        let ns: Vec<f64> = (first..=last).map(|n| n as f64).collect();
        let es: Vec<f64> = (first..=last).map(|n| self.at(n)).collect();
        let len = ns.len() as f64;
        let n_bar = ns.iter().sum::<f64>() / len;
        let e_bar = es.iter().sum::<f64>() / len;
        let sxy: f64 = ns.iter().zip(&es).map(|(n, e)| (n - n_bar) * (e - e_bar)).sum();
        let sxx: f64 = ns.iter().map(|n| (n - n_bar).powi(2)).sum();
        sxy / sxx
    }

    /// Trend over `first..=last`, extrapolated to `per_steps` steps, as a
    /// fraction of the mean of the whole series.
    pub fn relative_drift(&self, first: usize, last: usize, per_steps: usize) -> f64 {
        self.slope(first, last) * per_steps as f64 / self.mean()
    }
}

fn coords(x: &StateVector) -> [f64; 4] {
    [x.r[0], x.r[1], x.v[0], x.v[1]]
}

fn to_array(v: &[f64]) -> [f64; 4] {
    [v[0], v[1], v[2], v[3]]
}

/// Posterior means of a centralized filter with `k_total` particles for
/// `n = 1..=observations.len()`.
pub fn proxy_reference(
    model: &TrackingModel,
    k_total: usize,
    observations: &[Observation],
    plan: &SeedPlan,
    run: u64,
) -> Result<Vec<[f64; 4]>, ExperimentError> {
    let config = EngineConfig::centralized(k_total);
    let map = config.exchange_map()?;
    let records = track(model, &config, &map, observations, plan, run)?;
    Ok(records[1..].iter().map(|r| to_array(&r.estimate)).collect())
}

/// Runs `runs` independent simulations of `horizon` steps and accumulates
/// the estimation error against the chosen reference.
pub fn l2_error_series(
    model: &TrackingModel,
    config: &EngineConfig,
    horizon: usize,
    runs: usize,
    reference: Reference<'_>,
    norm: ErrorNorm,
    plan: &SeedPlan,
) -> Result<ErrorSeries, ExperimentError> {
    if runs == 0 || horizon == 0 {
        return Err(ExperimentError::InvalidParameter(
            "runs and horizon must be at least 1".into(),
        ));
    }
    if let Reference::Proxy(seqs) = reference {
        if seqs.len() != runs {
            return Err(ExperimentError::ReferenceLength {
                expected: runs,
                got: seqs.len(),
            });
        }
        if let Some(bad) = seqs.iter().find(|s| s.len() != horizon) {
            return Err(ExperimentError::ReferenceLength {
                expected: horizon,
                got: bad.len(),
            });
        }
    }
    let map = config.exchange_map()?;
    let per_run: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let traj = model.simulate_trajectory(horizon, &mut plan.trajectory(run as u64));
            let records = track(model, config, &map, &traj.observations, plan, run as u64)?;
            let sq = (1..=horizon)
                .map(|n| {
                    let truth = match reference {
                        Reference::TrueState => coords(&traj.states[n - 1]),
                        Reference::Proxy(seqs) => seqs[run][n - 1],
                    };
                    norm.squared_distance(&records[n].estimate, &truth)
                })
                .collect();
            Ok(sq)
        })
        .collect::<Result<_, ExperimentError>>()?;

    Ok(reduce_errors(&per_run, config, reference.kind()))
}

pub(super) fn reduce_errors(
    per_run: &[Vec<f64>],
    config: &EngineConfig,
    reference: ReferenceKind,
) -> ErrorSeries {
    let runs = per_run.len();
    let horizon = per_run[0].len();
    let errors = (0..horizon)
        .map(|i| (per_run.iter().map(|v| v[i]).sum::<f64>() / runs as f64).sqrt())
        .collect();
    let per_run_mse = per_run
        .iter()
        .map(|v| v.iter().sum::<f64>() / horizon as f64)
        .collect();
    ErrorSeries {
        errors,
        m_pes: config.m_pes,
        k_per_pe: config.k_per_pe,
        runs,
        reference,
        per_run_mse,
    }
}
