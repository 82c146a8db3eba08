//! Exact optimal filter for finite-state hidden Markov models.

use thiserror::Error;

use crate::model::{DiscreteHmmModel, ModelError};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("observation {symbol} at step {step} has zero predicted probability")]
    ImpossibleObservation { step: usize, symbol: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Probability vector over the model's states.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, OracleError> {
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(OracleError::InvalidDistribution(
                "entries must be finite and non-negative".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(OracleError::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// One exact filter update: predict through the transition matrix, weight by
/// the likelihood of `symbol`, normalize.
pub fn forward_update(
    prior: &DiscreteDistribution,
    model: &DiscreteHmmModel,
    symbol: usize,
) -> Result<DiscreteDistribution, OracleError> {
    forward_update_at(prior, model, symbol, 1)
}

fn forward_update_at(
    prior: &DiscreteDistribution,
    model: &DiscreteHmmModel,
    symbol: usize,
    step: usize,
) -> Result<DiscreteDistribution, OracleError> {
    let s = model.n_states();
    if prior.len() != s {
        return Err(OracleError::InvalidDistribution(format!(
            "distribution has {} states, model has {s}",
            prior.len()
        )));
    }
    let g = model.likelihood(symbol)?;
    let t = model.transition();
    let mut post: Vec<f64> = (0..s)
        .map(|j| g[j] * (0..s).map(|i| t[i][j] * prior.probabilities[i]).sum::<f64>())
        .collect();
    let total: f64 = post.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(OracleError::ImpossibleObservation { step, symbol });
    }
    for p in &mut post {
        *p /= total;
    }
    Ok(DiscreteDistribution {
        probabilities: post,
    })
}

/// Filters from the model prior; element `n` is the filter at time `n`
/// (element 0 is the prior itself).
pub fn exact_filter_sequence(
    model: &DiscreteHmmModel,
    observations: &[usize],
) -> Result<Vec<DiscreteDistribution>, OracleError> {
    let mut out = Vec::with_capacity(observations.len() + 1);
    out.push(DiscreteDistribution::new(model.prior().to_vec())?);
    for (n, &y) in observations.iter().enumerate() {
        let next = forward_update_at(&out[n], model, y, n + 1)?;
        out.push(next);
    }
    Ok(out)
}
