//! Convergence-rate estimation: errors against a large centralized proxy for
//! a sweep of PE counts, and a log-linear least-squares power-law fit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{proxy_reference, track, EngineConfig, ErrorNorm, ExperimentError};
use crate::model::TrackingModel;
use crate::rng::SeedPlan;
use crate::topology::TopologyKind;

/// Interpretation of `N` in the fitted form `C / (M^zeta N^(1/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RateReading {
    /// `N = K`, particles per PE.
    #[default]
    PerPe,
    /// `N = M K`, total particle count.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFitResult {
    pub c_fit: f64,
    pub zeta_fit: f64,
    /// Sum of squared residuals in log space.
    pub residual: f64,
    pub reading: RateReading,
    pub k_per_pe: usize,
}

impl RateFitResult {
    pub fn fitted(&self, m_pes: usize) -> f64 {
        let n = match self.reading {
            RateReading::PerPe => self.k_per_pe,
            RateReading::Total => m_pes * self.k_per_pe,
        } as f64;
        self.c_fit / ((m_pes as f64).powf(self.zeta_fit) * n.sqrt())
    }
}

/// Fits `log e = log C - zeta log M - (1/2) log N` by ordinary least squares.
pub fn fit_rate(
    error_by_m: &[(usize, f64)],
    k_per_pe: usize,
    reading: RateReading,
) -> Result<RateFitResult, ExperimentError> {
    let mut distinct: Vec<usize> = error_by_m.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(ExperimentError::DegenerateDesign(distinct.len()));
    }
    if let Some(&(m, e)) = error_by_m.iter().find(|(m, e)| *m == 0 || e.is_nan() || *e <= 0.0) {
        return Err(ExperimentError::InvalidParameter(format!(
            "rate fit needs M >= 1 and positive errors, got ({m}, {e})"
        )));
    }
    if k_per_pe == 0 {
        return Err(ExperimentError::InvalidParameter("K must be at least 1".into()));
    }
    let points: Vec<(f64, f64)> = error_by_m
        .iter()
        .map(|&(m, e)| {
            let n = match reading {
                RateReading::PerPe => k_per_pe,
                RateReading::Total => m * k_per_pe,
            } as f64;
            ((m as f64).ln(), e.ln() + 0.5 * n.ln())
        })
        .collect();
    let len = points.len() as f64;
    let x_bar = points.iter().map(|p| p.0).sum::<f64>() / len;
    let z_bar = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxz: f64 = points.iter().map(|(x, z)| (x - x_bar) * (z - z_bar)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - x_bar).powi(2)).sum();
    let slope = sxz / sxx;
    let intercept = z_bar - slope * x_bar;
    let residual = points
        .iter()
        .map(|(x, z)| (z - intercept - slope * x).powi(2))
        .sum();
    Ok(RateFitResult {
        c_fit: intercept.exp(),
        zeta_fit: -slope,
        residual,
        reading,
        k_per_pe,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweepConfig {
    pub m_values: Vec<usize>,
    pub k_per_pe: usize,
    pub exchange_period: usize,
    pub topology: TopologyKind,
    /// Time step at which errors are measured.
    pub eval_step: usize,
    pub runs: usize,
    /// Particle count of the centralized proxy filter.
    pub proxy_particles: usize,
    pub norm: ErrorNorm,
}

/// For each `M`, `sqrt(mean_runs |x_hat - proxy|^2)` at `eval_step`. The
/// proxy of each run filters the same observations as the DPFs of that run.
pub fn rate_sweep(
    model: &TrackingModel,
    config: &RateSweepConfig,
    plan: &SeedPlan,
) -> Result<Vec<(usize, f64)>, ExperimentError> {
    if config.runs == 0 || config.eval_step == 0 || config.m_values.is_empty() {
        return Err(ExperimentError::InvalidParameter(
            "rate sweep needs runs, eval_step and at least one M".into(),
        ));
    }
    let filters: Vec<EngineConfig> = config
        .m_values
        .iter()
        .map(|&m| EngineConfig {
            topology: config.topology,
            ..EngineConfig::new(m, config.k_per_pe, config.exchange_period)
        })
        .collect();
    let maps = filters
        .iter()
        .map(EngineConfig::exchange_map)
        .collect::<Result<Vec<_>, _>>()?;
    let n = config.eval_step;

    let per_run: Vec<Vec<f64>> = (0..config.runs as u64)
        .into_par_iter()
        .map(|run| {
            let traj = model.simulate_trajectory(n, &mut plan.trajectory(run));
            let proxy = proxy_reference(model, config.proxy_particles, &traj.observations, plan, run)?;
            let target = proxy[n - 1];
            filters
                .iter()
                .zip(&maps)
                .map(|(f, map)| {
                    let rec = track(model, f, map, &traj.observations, plan, run)?;
                    Ok(config.norm.squared_distance(&rec[n].estimate, &target))
                })
                .collect()
        })
        .collect::<Result<_, ExperimentError>>()?;

    Ok(config
        .m_values
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let mse = per_run.iter().map(|v| v[i]).sum::<f64>() / config.runs as f64;
            (m, mse.sqrt())
        })
        .collect())
}
