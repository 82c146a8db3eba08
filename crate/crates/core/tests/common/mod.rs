//! Shared test helpers: a reference bootstrap particle filter and the
//! invariant checks reused by the acceptance suite.
#![allow(dead_code)]

use drna::engine::PeEnsemble;
use drna::experiments::{oracle_test_model, EngineConfig};
use drna::model::{StateSpaceModel, TrackingModel, TrackingModelParams};
use drna::rng::{SeedPlan, Stream};
use drna::topology::{build_exchange_map, ExchangeMap, TopologyKind};
use drna::FilterState;
use rand::{Rng, SeedableRng};

/// Plain single-population bootstrap filter written from the textbook
/// recursion: propagate, weight, multinomial resample. Arithmetic is kept in
/// the log domain with max shifting so its output can be compared bit-for-bit.
pub struct BootstrapPf<S> {
    pub particles: Vec<S>,
    pub log_weights: Vec<f64>,
}

fn lse(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl<S: Clone> BootstrapPf<S> {
    pub fn new<M, R>(model: &M, n: usize, rng: &mut R) -> Self
    where
        M: StateSpaceModel<State = S>,
        R: Rng,
    {
        Self {
            particles: (0..n).map(|_| model.sample_initial(rng)).collect(),
            log_weights: vec![(1.0 / n as f64).ln(); n],
        }
    }

    pub fn step<M, R>(&mut self, model: &M, y: &M::Observation, rng: &mut R)
    where
        M: StateSpaceModel<State = S>,
        R: Rng,
    {
        let n = self.particles.len();
        for i in 0..n {
            self.particles[i] = model.sample_next(&self.particles[i], rng);
            self.log_weights[i] += model.log_likelihood_of(&self.particles[i], y);
        }
        let log_total = lse(&self.log_weights);
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for lw in &self.log_weights {
            acc += (lw - max).exp();
            cdf.push(acc);
        }
        let mut next = Vec::with_capacity(n);
        for _ in 0..n {
            let u = rng.random::<f64>() * acc;
            let mut lo = 0;
            let mut hi = n;
            while lo < hi {
                let mid = (lo + hi) / 2;
                if cdf[mid] <= u {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            next.push(self.particles[lo.min(n - 1)].clone());
        }
        self.particles = next;
        let share = log_total - (n as f64).ln();
        self.log_weights.iter_mut().for_each(|w| *w = share);
    }

    pub fn integral(&self, h: impl Fn(&S) -> f64) -> f64 {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.log_weights.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut acc = 0.0;
        for (x, wi) in self.particles.iter().zip(&w) {
            acc += (1.0 * (wi / total)) * h(x);
        }
        acc
    }
}

pub fn tracking_model() -> TrackingModel {
    TrackingModel::new(TrackingModelParams::default()).unwrap()
}

type Check = Result<String, String>;

/// Engine with `M = 1` against [`BootstrapPf`] on the same stream, on both
/// the tracking model and the discrete HMM.
pub fn check_single_pe_reduction(steps: usize, k: usize) -> Check {
    let model = tracking_model();
    let plan = SeedPlan::new(91);
    let traj = model.simulate_trajectory(steps, &mut plan.trajectory(0));
    let config = EngineConfig::centralized(k);
    let map = config.exchange_map().unwrap();
    let records = drna::experiments::track(&model, &config, &map, &traj.observations, &plan, 0)
        .map_err(|e| e.to_string())?;
    let mut rng = plan.pe_streams(0, config.stream_tag(), 1).remove(0);
    let mut pf = BootstrapPf::new(&model, k, &mut rng);
    for (n, y) in traj.observations.iter().enumerate() {
        pf.step(&model, y, &mut rng);
        let want: Vec<f64> = (0..4)
            .map(|i| {
                pf.integral(|x| match i {
                    0 => x.r[0],
                    1 => x.r[1],
                    2 => x.v[0],
                    _ => x.v[1],
                })
            })
            .collect();
        if records[n + 1].estimate != want {
            return Err(format!(
                "tracking step {}: engine {:?} vs bootstrap {:?}",
                n + 1,
                records[n + 1].estimate,
                want
            ));
        }
    }

    let hmm = oracle_test_model();
    let trace = hmm.sample_and_observe(steps, &mut plan.trajectory(1));
    let mut streams = vec![Stream::seed_from_u64(5)];
    let mut state =
        FilterState::init(&hmm, k, 1, ExchangeMap::identity(1, k), &mut streams).unwrap();
    let mut rng = Stream::seed_from_u64(5);
    let mut pf = BootstrapPf::new(&hmm, k, &mut rng);
    for (n, y) in trace.observations.iter().enumerate() {
        state.step(&hmm, y, &mut streams).map_err(|e| e.to_string())?;
        pf.step(&hmm, y, &mut rng);
        for s in 0..hmm.n_states() {
            let a = state.estimate_integral(|x| (*x == s) as u8 as f64);
            let b = pf.integral(|x| (*x == s) as u8 as f64);
            if a != b {
                return Err(format!("hmm step {}: P(x = {s}) {a} vs {b}", n + 1));
            }
        }
    }
    Ok(format!("bit-exact over {steps} steps, K = {k}, tracking and HMM"))
}

/// Sorted `(coordinates, weight)` view of the global measure.
fn measure_multiset(state: &FilterState<drna::model::StateVector>) -> Vec<([f64; 4], f64)> {
    let mut v: Vec<_> = state
        .global_measure()
        .entries
        .into_iter()
        .map(|(x, w)| ([x.r[0], x.r[1], x.v[0], x.v[1]], w))
        .collect();
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.total_cmp(&b.1)));
    v
}

fn compare_multisets(
    before: &[([f64; 4], f64)],
    after: &[([f64; 4], f64)],
    tol: f64,
) -> Result<f64, String> {
    if before.len() != after.len() {
        return Err("measure size changed".into());
    }
    let mut worst: f64 = 0.0;
    for (a, b) in before.iter().zip(after) {
        if a.0 != b.0 {
            return Err(format!("particle {:?} replaced by {:?}", a.0, b.0));
        }
        worst = worst.max((a.1 - b.1).abs());
    }
    if worst > tol {
        return Err(format!("weight moved by {worst:e}"));
    }
    Ok(worst)
}

/// Global measure before and after exchange agree as multisets, both after
/// resampling (equal local weights) and on unresampled, uneven weights.
pub fn check_exchange_preserves_measure() -> Check {
    let model = tracking_model();
    let plan = SeedPlan::new(17);
    let mut worst: f64 = 0.0;
    for (kind, m, k) in [
        (TopologyKind::HavelHakimi, 8, 32),
        (TopologyKind::HavelHakimi, 13, 20),
        (TopologyKind::Circular, 5, 16),
    ] {
        let traj = model.simulate_trajectory(15, &mut plan.trajectory(m as u64));
        let map = build_exchange_map(kind, m, k, None).unwrap();
        let mut streams = plan.pe_streams(0, 1, m);
        let mut state = FilterState::init(&model, k, 1_000_000, map.clone(), &mut streams).unwrap();
        for (n, y) in traj.observations.iter().enumerate() {
            state
                .propagate_and_weight(&model, y, &mut streams)
                .map_err(|e| e.to_string())?;
            if n % 3 == 0 {
                let before = measure_multiset(&state);
                state.exchange_with(&map).map_err(|e| e.to_string())?;
                worst = worst.max(compare_multisets(&before, &measure_multiset(&state), 1e-12)?);
            }
            state.local_resample(&mut streams).map_err(|e| e.to_string())?;
            let before = measure_multiset(&state);
            state.exchange();
            worst = worst.max(compare_multisets(&before, &measure_multiset(&state), 1e-12)?);
        }
    }
    Ok(format!("largest weight change {worst:.2e}"))
}

/// `log_aggregate` of every PE is bit-identical across local resampling, and
/// global weights sum to one within 1e-10 at every step.
pub fn check_resampling_conservation_and_normalization(steps: usize) -> Check {
    let model = tracking_model();
    let plan = SeedPlan::new(23);
    let traj = model.simulate_trajectory(steps, &mut plan.trajectory(0));
    let cfg = EngineConfig::new(16, 64, 5);
    let mut streams = plan.pe_streams(0, cfg.stream_tag(), cfg.m_pes);
    let mut state = FilterState::init(
        &model,
        cfg.k_per_pe,
        cfg.exchange_period,
        cfg.exchange_map().unwrap(),
        &mut streams,
    )
    .unwrap();
    let mut worst_norm: f64 = 0.0;
    for (n, y) in traj.observations.iter().enumerate() {
        state
            .propagate_and_weight(&model, y, &mut streams)
            .map_err(|e| e.to_string())?;
        let before: Vec<f64> = state.ensembles().iter().map(PeEnsemble::log_aggregate).collect();
        state.local_resample(&mut streams).map_err(|e| e.to_string())?;
        let after: Vec<f64> = state.ensembles().iter().map(PeEnsemble::log_aggregate).collect();
        if before != after {
            return Err(format!("aggregate changed by resampling at step {}", n + 1));
        }
        if state.is_exchange_step(n + 1) {
            state.exchange();
        }
        let dev = (state.global_measure().total_weight() - 1.0).abs();
        worst_norm = worst_norm.max(dev);
        if dev > 1e-10 {
            return Err(format!("global weights sum off by {dev:e} at step {}", n + 1));
        }
    }
    Ok(format!(
        "aggregates exact over {steps} steps; worst normalization error {worst_norm:.1e}"
    ))
}

/// Every map built for `MK <= 1e5` hits each `(PE, slot)` exactly once, with
/// `K` arrivals per PE.
pub fn check_exchange_maps_bijective() -> Check {
    let mut checked = 0usize;
    for m in (1..=40).chain([48, 64, 100, 128, 256]) {
        for k in [1usize, 2, 3, 5, 8, 17, 64, 128, 256, 390] {
            if m * k > 100_000 {
                continue;
            }
            let mut maps = vec![build_exchange_map(TopologyKind::HavelHakimi, m, k, None)
                .map_err(|e| format!("M = {m}, K = {k}: {e}"))?];
            if m >= 2 && k >= 2 {
                maps.push(ExchangeMap::circular(m, k).unwrap());
            }
            for map in maps {
                let mut hits = vec![0u8; m * k];
                let mut arrivals = vec![0usize; m];
                for pe in 0..m {
                    for slot in 0..k {
                        let (u, v) = map.apply(pe, slot);
                        if u >= m || v >= k {
                            return Err(format!("M = {m}, K = {k}: target out of range"));
                        }
                        hits[u * k + v] += 1;
                        arrivals[u] += 1;
                    }
                }
                if hits.iter().any(|&h| h != 1) || arrivals.iter().any(|&a| a != k) {
                    return Err(format!("M = {m}, K = {k}: not a bijection"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} maps checked exhaustively"))
}

/// Chi-square 0.99 quantiles by degrees of freedom.
pub fn chi2_critical_99(df: usize) -> f64 {
    match df {
        4 => 13.2767,
        5 => 15.0863,
        7 => 18.4753,
        9 => 21.6660,
        _ => panic!("no tabulated quantile for {df} degrees of freedom"),
    }
}

/// Resamples a PE of labelled particles `reps` times and tests the pooled
/// offspring counts against the weights, and the per-repetition offspring
/// count of particle 0 against Binomial(K, w_0).
pub fn check_resampling_chi_square(log_weights: &[f64], reps: usize, seed: u64) -> Check {
    let k = log_weights.len();
    let probs: Vec<f64> = {
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
        let t: f64 = w.iter().sum();
        w.into_iter().map(|x| x / t).collect()
    };
    let mut rng = Stream::seed_from_u64(seed);
    let mut pooled = vec![0usize; k];
    let bins = 5;
    let mut first = vec![0usize; bins];
    for _ in 0..reps {
        let mut e = PeEnsemble::new((0..k).collect(), log_weights.to_vec()).unwrap();
        e.resample(&mut rng);
        let mut c0 = 0;
        for &j in e.particles() {
            pooled[j] += 1;
            c0 += (j == 0) as usize;
        }
        first[c0.min(bins - 1)] += 1;
    }
    let total = (reps * k) as f64;
    let stat: f64 = pooled
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| (o as f64 - total * p).powi(2) / (total * p))
        .sum();
    let crit = chi2_critical_99(k - 1);
    if stat > crit {
        return Err(format!("pooled counts: chi2 = {stat:.2} > {crit}"));
    }

    let binom = |j: usize| -> f64 {
        let mut c = 1.0;
        for i in 0..j {
            c *= (k - i) as f64 / (i + 1) as f64;
        }
        c * probs[0].powi(j as i32) * (1.0 - probs[0]).powi((k - j) as i32)
    };
    let mut expected: Vec<f64> = (0..bins - 1).map(binom).collect();
    expected.push(1.0 - expected.iter().sum::<f64>());
    let stat0: f64 = first
        .iter()
        .zip(&expected)
        .map(|(&o, &p)| (o as f64 - reps as f64 * p).powi(2) / (reps as f64 * p))
        .sum();
    let crit0 = chi2_critical_99(bins - 1);
    if stat0 > crit0 {
        return Err(format!("offspring of particle 0: chi2 = {stat0:.2} > {crit0}"));
    }
    Ok(format!("chi2 {stat:.2} (crit {crit}), {stat0:.2} (crit {crit0})"))
}
