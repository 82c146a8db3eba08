//! Finite-state hidden Markov model, used where the exact filter is computable.

use rand::Rng;

use super::{ModelError, StateSpaceModel};

const STOCHASTIC_TOL: f64 = 1e-12;

/// `emission[symbol][state]` is `P(symbol | state)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHmmModel {
    prior: Vec<f64>,
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
    log_emission: Vec<Vec<f64>>,
}

/// Simulated chain; `states[n-1]`/`observations[n-1]` belong to time `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmTrace {
    pub initial: usize,
    pub states: Vec<usize>,
    pub observations: Vec<usize>,
}

fn check_probability_vector(v: &[f64], name: &'static str) -> Result<(), ModelError> {
    if v.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(ModelError::InvalidParameter {
            name,
            reason: "entries must be finite and non-negative".into(),
        });
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(ModelError::InvalidParameter {
            name,
            reason: format!("entries sum to {total}, expected 1"),
        });
    }
    Ok(())
}

fn sample_categorical<R: Rng + ?Sized>(probs: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
        if p > 0.0 {
            last = i;
        }
    }
    last
}

impl DiscreteHmmModel {
    pub fn new(
        prior: Vec<f64>,
        transition: Vec<Vec<f64>>,
        emission: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let s = prior.len();
        if s == 0 {
            return Err(ModelError::InvalidParameter {
                name: "prior",
                reason: "model needs at least one state".into(),
            });
        }
        check_probability_vector(&prior, "prior")?;
        if transition.len() != s || transition.iter().any(|row| row.len() != s) {
            return Err(ModelError::InvalidParameter {
                name: "transition",
                reason: format!("expected a {s}x{s} matrix"),
            });
        }
        for row in &transition {
            check_probability_vector(row, "transition")?;
        }
        if emission.is_empty() || emission.iter().any(|col| col.len() != s) {
            return Err(ModelError::InvalidParameter {
                name: "emission",
                reason: format!("expected one length-{s} likelihood vector per symbol"),
            });
        }
        for state in 0..s {
            let col: Vec<f64> = emission.iter().map(|e| e[state]).collect();
            check_probability_vector(&col, "emission")?;
        }
        let log_emission = emission
            .iter()
            .map(|e| e.iter().map(|p| p.ln()).collect())
            .collect();
        Ok(Self {
            prior,
            transition,
            emission,
            log_emission,
        })
    }

    pub fn n_states(&self) -> usize {
        self.prior.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.emission.len()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    /// Likelihood vector over states for `symbol`.
    pub fn likelihood(&self, symbol: usize) -> Result<&[f64], ModelError> {
        self.emission
            .get(symbol)
            .map(Vec::as_slice)
            .ok_or(ModelError::InvalidSymbol {
                symbol,
                symbols: self.n_symbols(),
            })
    }

    /// Smallest `a` with `1/a <= g(y|x) <= a` everywhere; infinite if some
    /// emission probability is zero.
    pub fn likelihood_bound(&self) -> f64 {
        self.emission
            .iter()
            .flatten()
            .map(|&g| if g > 0.0 { g.max(g.recip()) } else { f64::INFINITY })
            .fold(1.0, f64::max)
    }

    pub fn sample_and_observe<R: Rng + ?Sized>(&self, n_steps: usize, rng: &mut R) -> HmmTrace {
        let initial = sample_categorical(self.prior.iter().copied(), rng);
        let mut states = Vec::with_capacity(n_steps);
        let mut observations = Vec::with_capacity(n_steps);
        let mut x = initial;
        for _ in 0..n_steps {
            x = sample_categorical(self.transition[x].iter().copied(), rng);
            observations.push(sample_categorical(self.emission.iter().map(|e| e[x]), rng));
            states.push(x);
        }
        HmmTrace {
            initial,
            states,
            observations,
        }
    }
}

impl StateSpaceModel for DiscreteHmmModel {
    type State = usize;
    type Observation = usize;

    fn check_observation(&self, y: &usize) -> Result<(), ModelError> {
        self.likelihood(*y).map(|_| ())
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_categorical(self.prior.iter().copied(), rng)
    }

    fn sample_next<R: Rng + ?Sized>(&self, prev: &usize, rng: &mut R) -> usize {
        sample_categorical(self.transition[*prev].iter().copied(), rng)
    }

    fn log_likelihood_of(&self, x: &usize, y: &usize) -> f64 {
        self.log_emission[*y][*x]
    }
}
