//! Distributed particle filter with local resampling and periodic exchange.
//!
//! `M` processing elements (PEs) each hold `K` particles with unnormalized
//! log-weights and a log aggregate weight. One time step is
//!
//! 1. propagate every particle through the transition kernel and add the
//!    log-likelihood of the new observation to its log-weight;
//! 2. resample each PE locally (multinomial, `K` draws) and give every
//!    survivor an equal share `W*/K` of the PE's aggregate weight;
//! 3. every `n0` steps, move particles and their weights between PEs along a
//!    fixed exchange map, then recompute each PE's aggregate.
//!
//! Steps 1 and 2 run concurrently over PEs, each PE drawing only from its own
//! random stream, so the output is independent of the number of threads.
//! Global quantities (normalized aggregates, estimates) are derived lazily
//! from the per-PE log-domain state.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Coordinates, ModelError, StateSpaceModel};
use crate::topology::{ExchangeMap, TopologyError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid filter configuration: {0}")]
    InvalidArgument(String),
    #[error("expected {expected} random streams (one per PE), got {got}")]
    StreamCount { expected: usize, got: usize },
    #[error("PE {pe} lost all weight at step {step}")]
    DegenerateWeights { pe: usize, step: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// `log(sum(exp(values)))` with max shifting. Empty input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `exp(v - max) / sum(exp(v - max))`.
fn normalize_log(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = out.iter().sum();
    for w in &mut out {
        *w /= total;
    }
    out
}

/// One PE's particles, their unnormalized log-weights and the log aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct PeEnsemble<S> {
    particles: Vec<S>,
    log_weights: Vec<f64>,
    log_aggregate: f64,
}

impl<S: Clone> PeEnsemble<S> {
    /// Aggregate is computed as the log-sum-exp of `log_weights`.
    pub fn new(particles: Vec<S>, log_weights: Vec<f64>) -> Result<Self, EngineError> {
        if particles.is_empty() || particles.len() != log_weights.len() {
            return Err(EngineError::InvalidArgument(format!(
                "{} particles with {} weights",
                particles.len(),
                log_weights.len()
            )));
        }
        let log_aggregate = log_sum_exp(&log_weights);
        Ok(Self {
            particles,
            log_weights,
            log_aggregate,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[S] {
        &self.particles
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_aggregate(&self) -> f64 {
        self.log_aggregate
    }

    /// Locally normalized weights.
    pub fn local_weights(&self) -> Vec<f64> {
        normalize_log(&self.log_weights)
    }

    fn propagate_and_weight<M, R>(&mut self, model: &M, y: &M::Observation, rng: &mut R)
    where
        M: StateSpaceModel<State = S>,
        R: Rng + ?Sized,
    {
        for (x, lw) in self.particles.iter_mut().zip(&mut self.log_weights) {
            *x = model.sample_next(x, rng);
            *lw += model.log_likelihood_of(x, y);
        }
        self.log_aggregate = log_sum_exp(&self.log_weights);
    }

    /// Multinomial resampling by inverse-CDF lookup: `K` uniforms, each
    /// located by binary search in the cumulative local weights. Survivors
    /// all carry `log_aggregate - ln K`; the aggregate itself is untouched.
    pub fn resample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let k = self.particles.len();
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut cumulative = Vec::with_capacity(k);
        let mut acc = 0.0;
        for lw in &self.log_weights {
            acc += (lw - max).exp();
            cumulative.push(acc);
        }
        let total = acc;
        let resampled: Vec<S> = (0..k)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                let j = cumulative.partition_point(|&c| c <= u).min(k - 1);
                self.particles[j].clone()
            })
            .collect();
        self.particles = resampled;
        let share = self.log_aggregate - (k as f64).ln();
        self.log_weights.fill(share);
    }

    fn recompute_aggregate(&mut self) {
        self.log_aggregate = log_sum_exp(&self.log_weights);
    }
}

/// Flattened global approximation: `(state, weight)` for every `(m, k)` in
/// PE-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSampleSet<S> {
    pub entries: Vec<(S, f64)>,
}

impl<S> WeightedSampleSet<S> {
    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    pub fn integrate(&self, h: impl Fn(&S) -> f64) -> f64 {
        self.entries.iter().map(|(x, w)| w * h(x)).sum()
    }
}

/// What happened in one call to [`FilterState::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub step: usize,
    pub exchanged: bool,
}

/// Full state of the distributed filter.
#[derive(Debug, Clone)]
pub struct FilterState<S> {
    ensembles: Vec<PeEnsemble<S>>,
    step: usize,
    exchange_period: usize,
    exchange_map: ExchangeMap,
}

fn check_streams<R>(streams: &[R], m_pes: usize) -> Result<(), EngineError> {
    if streams.len() != m_pes {
        return Err(EngineError::StreamCount {
            expected: m_pes,
            got: streams.len(),
        });
    }
    Ok(())
}

impl<S: Clone + Send + Sync> FilterState<S> {
    /// Draws `K` prior particles per PE from that PE's stream, with
    /// `w = 1/(MK)` per particle and `W = 1/M` per PE.
    pub fn init<M, R>(
        model: &M,
        k_per_pe: usize,
        exchange_period: usize,
        exchange_map: ExchangeMap,
        streams: &mut [R],
    ) -> Result<Self, EngineError>
    where
        M: StateSpaceModel<State = S>,
        R: Rng + Send,
    {
        let m_pes = streams.len();
        if m_pes == 0 || k_per_pe == 0 {
            return Err(EngineError::InvalidArgument(format!(
                "need M >= 1 and K >= 1, got M = {m_pes}, K = {k_per_pe}"
            )));
        }
        if exchange_period == 0 {
            return Err(EngineError::InvalidArgument(
                "exchange period must be at least 1".into(),
            ));
        }
        exchange_map.check_dimensions(m_pes, k_per_pe)?;
        let log_w = (1.0 / (m_pes * k_per_pe) as f64).ln();
        let log_agg = (1.0 / m_pes as f64).ln();
        let ensembles = streams
            .par_iter_mut()
            .map(|rng| PeEnsemble {
                particles: (0..k_per_pe).map(|_| model.sample_initial(rng)).collect(),
                log_weights: vec![log_w; k_per_pe],
                log_aggregate: log_agg,
            })
            .collect();
        Ok(Self {
            ensembles,
            step: 0,
            exchange_period,
            exchange_map,
        })
    }

    /// Assembles a state from explicit ensembles (all of equal size).
    pub fn from_ensembles(
        ensembles: Vec<PeEnsemble<S>>,
        exchange_period: usize,
        exchange_map: ExchangeMap,
    ) -> Result<Self, EngineError> {
        let k = ensembles.first().map_or(0, PeEnsemble::len);
        if k == 0 || ensembles.iter().any(|e| e.len() != k) {
            return Err(EngineError::InvalidArgument(
                "ensembles must be non-empty and of equal size".into(),
            ));
        }
        if exchange_period == 0 {
            return Err(EngineError::InvalidArgument(
                "exchange period must be at least 1".into(),
            ));
        }
        exchange_map.check_dimensions(ensembles.len(), k)?;
        Ok(Self {
            ensembles,
            step: 0,
            exchange_period,
            exchange_map,
        })
    }

    pub fn m_pes(&self) -> usize {
        self.ensembles.len()
    }

    pub fn k_per_pe(&self) -> usize {
        self.ensembles[0].len()
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn exchange_period(&self) -> usize {
        self.exchange_period
    }

    pub fn exchange_map(&self) -> &ExchangeMap {
        &self.exchange_map
    }

    pub fn ensembles(&self) -> &[PeEnsemble<S>] {
        &self.ensembles
    }

    pub fn ensembles_mut(&mut self) -> &mut [PeEnsemble<S>] {
        &mut self.ensembles
    }

    pub fn is_exchange_step(&self, n: usize) -> bool {
        n > 0 && n.is_multiple_of(self.exchange_period)
    }

    fn check_degenerate(&self, step: usize) -> Result<(), EngineError> {
        match self
            .ensembles
            .iter()
            .position(|e| e.log_aggregate.is_nan() || e.log_aggregate == f64::NEG_INFINITY)
        {
            Some(pe) => Err(EngineError::DegenerateWeights { pe, step }),
            None => Ok(()),
        }
    }

    /// Propagation and weighting of every PE; does not advance the step counter.
    pub fn propagate_and_weight<M, R>(
        &mut self,
        model: &M,
        y: &M::Observation,
        streams: &mut [R],
    ) -> Result<(), EngineError>
    where
        M: StateSpaceModel<State = S>,
        R: Rng + Send,
    {
        model.check_observation(y)?;
        check_streams(streams, self.m_pes())?;
        self.ensembles
            .par_iter_mut()
            .zip(streams.par_iter_mut())
            .for_each(|(e, rng)| e.propagate_and_weight(model, y, rng));
        self.check_degenerate(self.step + 1)
    }

    /// Local resampling of every PE.
    pub fn local_resample<R: Rng + Send>(&mut self, streams: &mut [R]) -> Result<(), EngineError> {
        check_streams(streams, self.m_pes())?;
        self.ensembles
            .par_iter_mut()
            .zip(streams.par_iter_mut())
            .for_each(|(e, rng)| e.resample(rng));
        Ok(())
    }

    /// Exchange along the state's own map.
    pub fn exchange(&mut self) {
        let map = std::mem::replace(&mut self.exchange_map, ExchangeMap::identity(0, 0));
        self.apply_exchange(&map);
        self.exchange_map = map;
    }

    /// Moves particle `(m, k)` and its weight to `map(m, k)`, then recomputes
    /// every PE's aggregate from its new residents.
    pub fn exchange_with(&mut self, map: &ExchangeMap) -> Result<(), EngineError> {
        map.check_dimensions(self.m_pes(), self.k_per_pe())?;
        self.apply_exchange(map);
        Ok(())
    }

    fn apply_exchange(&mut self, map: &ExchangeMap) {
        if map.is_identity() {
            return;
        }
        let k = self.k_per_pe();
        let total = self.m_pes() * k;
        let mut slots: Vec<Option<(S, f64)>> = (0..total).map(|_| None).collect();
        for (m, e) in self.ensembles.iter_mut().enumerate() {
            let particles = std::mem::take(&mut e.particles);
            for (j, (x, lw)) in particles.into_iter().zip(&e.log_weights).enumerate() {
                slots[map.target(m * k + j)] = Some((x, *lw));
            }
        }
        let mut slots = slots.into_iter();
        for e in &mut self.ensembles {
            for j in 0..k {
                let (x, lw) = slots
                    .next()
                    .flatten()
                    .expect("exchange map is a bijection");
                e.particles.push(x);
                e.log_weights[j] = lw;
            }
            e.recompute_aggregate();
        }
    }

    /// One full time step for observation `y`; exchanges when the new step
    /// index is a positive multiple of the exchange period.
    pub fn step<M, R>(
        &mut self,
        model: &M,
        y: &M::Observation,
        streams: &mut [R],
    ) -> Result<StepOutcome, EngineError>
    where
        M: StateSpaceModel<State = S>,
        R: Rng + Send,
    {
        self.propagate_and_weight(model, y, streams)?;
        self.local_resample(streams)?;
        let n = self.step + 1;
        let exchanged = self.is_exchange_step(n);
        if exchanged {
            self.exchange();
        }
        self.step = n;
        Ok(StepOutcome { step: n, exchanged })
    }

    /// Globally normalized aggregate weights `W(m)`.
    pub fn normalized_aggregates(&self) -> Vec<f64> {
        let logs: Vec<f64> = self.ensembles.iter().map(|e| e.log_aggregate).collect();
        normalize_log(&logs)
    }

    /// `max_m W(m)`.
    pub fn sup_normalized_aggregate(&self) -> f64 {
        self.normalized_aggregates()
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Visits every particle with its global weight `W(m) * w(m, k)`, in
    /// PE-major order.
    fn for_each_weighted(&self, mut f: impl FnMut(&S, f64)) {
        for (e, big_w) in self.ensembles.iter().zip(self.normalized_aggregates()) {
            for (x, w) in e.particles.iter().zip(e.local_weights()) {
                f(x, big_w * w);
            }
        }
    }

    pub fn global_measure(&self) -> WeightedSampleSet<S> {
        let mut entries = Vec::with_capacity(self.m_pes() * self.k_per_pe());
        self.for_each_weighted(|x, w| entries.push((x.clone(), w)));
        WeightedSampleSet { entries }
    }

    /// Weighted-sample approximation of `integral h dpi_n`.
    pub fn estimate_integral(&self, h: impl Fn(&S) -> f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_weighted(|x, w| acc += w * h(x));
        acc
    }
}

impl<S: Clone + Send + Sync + Coordinates> FilterState<S> {
    /// Posterior mean; coordinate `i` equals `estimate_integral(|x| x.coordinate(i))`.
    pub fn estimate_mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; S::DIM];
        self.for_each_weighted(|x, w| {
            for (i, a) in acc.iter_mut().enumerate() {
                *a += w * x.coordinate(i);
            }
        });
        acc
    }
}

/// Per-step filter telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub exchanged: bool,
    pub sup_aggregate: f64,
    pub estimate: Vec<f64>,
}

pub trait TelemetrySink {
    fn record(&mut self, record: StepRecord);
}

impl TelemetrySink for Vec<StepRecord> {
    fn record(&mut self, record: StepRecord) {
        self.push(record);
    }
}

/// Adapts a closure into a [`TelemetrySink`].
pub struct FnSink<F>(pub F);

impl<F: FnMut(StepRecord)> TelemetrySink for FnSink<F> {
    fn record(&mut self, record: StepRecord) {
        (self.0)(record)
    }
}

/// Discards telemetry.
pub struct NullSink;

impl TelemetrySink for NullSink {
    fn record(&mut self, _record: StepRecord) {}
}

/// Runs the filter over `observations`, reporting each step to `sink`.
/// A record for the initial state (step 0) is emitted first.
pub fn run_filter<'o, M, R>(
    model: &M,
    state: &mut FilterState<M::State>,
    streams: &mut [R],
    observations: impl IntoIterator<Item = &'o M::Observation>,
    sink: &mut dyn TelemetrySink,
) -> Result<(), EngineError>
where
    M: StateSpaceModel,
    M::State: Coordinates,
    M::Observation: 'o,
    R: Rng + Send,
{
    let snapshot = |state: &FilterState<M::State>, exchanged| StepRecord {
        step: state.step_index(),
        exchanged,
        sup_aggregate: state.sup_normalized_aggregate(),
        estimate: state.estimate_mean(),
    };
    sink.record(snapshot(state, false));
    for y in observations {
        let outcome = state.step(model, y, streams)?;
        sink.record(snapshot(state, outcome.exchanged));
    }
    Ok(())
}
