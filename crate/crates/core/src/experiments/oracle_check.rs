//! Distributed filter against the exact filter of a finite-state model.

use rayon::prelude::*;

use super::{EngineConfig, ExperimentError};
use crate::engine::FilterState;
use crate::model::DiscreteHmmModel;
use crate::oracle::exact_filter_sequence;
use crate::rng::SeedPlan;
use crate::topology::TopologyKind;

/// Sticky 3-state chain with noisy 3-symbol emissions.
pub fn oracle_test_model() -> DiscreteHmmModel {
    DiscreteHmmModel::new(
        vec![0.5, 0.3, 0.2],
        vec![
            vec![0.85, 0.10, 0.05],
            vec![0.10, 0.80, 0.10],
            vec![0.05, 0.10, 0.85],
        ],
        vec![
            vec![0.7, 0.2, 0.1],
            vec![0.2, 0.6, 0.2],
            vec![0.1, 0.2, 0.7],
        ],
    )
    .expect("valid model")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCheckRow {
    pub m_pes: usize,
    pub k_per_pe: usize,
    /// Mean over runs of `max_{n, s} |P_hat(x_n = s) - P(x_n = s)|`.
    pub mean_max_error: f64,
}

impl OracleCheckRow {
    pub fn total_particles(&self) -> usize {
        self.m_pes * self.k_per_pe
    }
}

/// For each `K`, average over runs of the worst absolute error of the
/// filtered state probabilities over `n = 1..=horizon`. Each run draws its
/// own observation sequence.
pub fn oracle_convergence(
    model: &DiscreteHmmModel,
    m_pes: usize,
    k_values: &[usize],
    exchange_period: usize,
    horizon: usize,
    runs: usize,
    plan: &SeedPlan,
) -> Result<Vec<OracleCheckRow>, ExperimentError> {
    if runs == 0 || horizon == 0 || k_values.is_empty() {
        return Err(ExperimentError::InvalidParameter(
            "oracle check needs runs, horizon and at least one K".into(),
        ));
    }
    let configs: Vec<EngineConfig> = k_values
        .iter()
        .map(|&k| EngineConfig {
            topology: TopologyKind::HavelHakimi,
            ..EngineConfig::new(m_pes, k, exchange_period)
        })
        .collect();
    let maps = configs
        .iter()
        .map(EngineConfig::exchange_map)
        .collect::<Result<Vec<_>, _>>()?;
    let s = model.n_states();

    let per_run: Vec<Vec<f64>> = (0..runs as u64)
        .into_par_iter()
        .map(|run| {
            let trace = model.sample_and_observe(horizon, &mut plan.trajectory(run));
            let exact = exact_filter_sequence(model, &trace.observations)?;
            configs
                .iter()
                .zip(&maps)
                .map(|(cfg, map)| {
                    let mut streams = plan.pe_streams(run, cfg.stream_tag(), cfg.m_pes);
                    let mut state = FilterState::init(
                        model,
                        cfg.k_per_pe,
                        cfg.exchange_period,
                        map.clone(),
                        &mut streams,
                    )?;
                    let mut worst: f64 = 0.0;
                    for (n, y) in trace.observations.iter().enumerate() {
                        state.step(model, y, &mut streams)?;
                        let p = exact[n + 1].probabilities();
                        for (j, &pj) in p.iter().enumerate().take(s) {
                            let est = state.estimate_integral(|x| (*x == j) as u8 as f64);
                            worst = worst.max((est - pj).abs());
                        }
                    }
                    Ok(worst)
                })
                .collect::<Result<Vec<f64>, ExperimentError>>()
        })
        .collect::<Result<_, ExperimentError>>()?;

    Ok(configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| OracleCheckRow {
            m_pes: cfg.m_pes,
            k_per_pe: cfg.k_per_pe,
            mean_max_error: per_run.iter().map(|v| v[i]).sum::<f64>() / runs as f64,
        })
        .collect())
}
