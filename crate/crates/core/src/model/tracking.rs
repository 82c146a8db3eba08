//! Target tracking over a rectangular region with a network of binary sensors.
//!
//! The state is `[r, v]` (2-D position and velocity). Transitions follow a
//! constant-velocity model with Gaussian perturbations; a proposed move that
//! leaves the region is rejected, in which case the target stays put and a
//! fresh velocity is drawn. Sensor `j` fires with probability `p1` when the
//! target is within `mu` meters of it and with probability `p1_bar` otherwise.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Coordinates, ModelError, StateSpaceModel};

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// Cell centers of a `cols x rows` grid, row-major from the bottom-left.
    pub fn grid(&self, cols: usize, rows: usize) -> Vec<[f64; 2]> {
        let dx = self.width() / cols as f64;
        let dy = self.height() / rows as f64;
        let mut points = Vec::with_capacity(cols * rows);
        for row in 0..rows {
            for col in 0..cols {
                points.push([
                    self.x_min + (col as f64 + 0.5) * dx,
                    self.y_min + (row as f64 + 0.5) * dy,
                ]);
            }
        }
        points
    }
}

impl Default for Region {
    fn default() -> Self {
        Self {
            x_min: -20.0,
            x_max: 20.0,
            y_min: -10.0,
            y_max: 10.0,
        }
    }
}

/// Target position (m) and velocity (m/step).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector {
    pub r: [f64; 2],
    pub v: [f64; 2],
}

impl StateVector {
    pub fn new(r: [f64; 2], v: [f64; 2]) -> Self {
        Self { r, v }
    }
}

impl Coordinates for StateVector {
    const DIM: usize = 4;

    fn coordinate(&self, axis: usize) -> f64 {
        match axis {
            0 => self.r[0],
            1 => self.r[1],
            2 => self.v[0],
            3 => self.v[1],
            _ => panic!("state axis {axis} out of range"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackingModelParams {
    pub region: Region,
    /// Step duration.
    pub kappa: f64,
    /// Direct position perturbation variance.
    pub sigma_r2: f64,
    /// Acceleration (velocity perturbation) variance.
    pub sigma_v2: f64,
    /// Initial velocity variance, also used for velocity redraws on reset.
    pub sigma_v0_2: f64,
    pub sensors: Vec<[f64; 2]>,
    /// Detection radius (m).
    pub mu: f64,
    /// Detection probability.
    pub p1: f64,
    /// False-alarm probability.
    pub p1_bar: f64,
}

impl Default for TrackingModelParams {
    fn default() -> Self {
        let region = Region::default();
        Self {
            region,
            kappa: 1.0,
            sigma_r2: 1e-2,
            sigma_v2: 1e-2,
            sigma_v0_2: 5e-2 * 5e-2,
            sensors: region.grid(6, 3),
            mu: 7.0,
            p1: 0.9,
            p1_bar: 1e-2,
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl TrackingModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let r = &self.region;
        if !(r.x_min < r.x_max && r.y_min < r.y_max) {
            return Err(invalid("region", "empty rectangle"));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(invalid("kappa", "must be positive"));
        }
        for (name, value) in [
            ("sigma_r2", self.sigma_r2),
            ("sigma_v2", self.sigma_v2),
            ("sigma_v0_2", self.sigma_v0_2),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(name, format!("variance must be positive, got {value}")));
            }
        }
        if self.sensors.is_empty() {
            return Err(invalid("sensors", "at least one sensor is required"));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(invalid("mu", "detection radius must be positive"));
        }
        if !(0.0 < self.p1_bar && self.p1_bar < self.p1 && self.p1 < 1.0) {
            return Err(invalid(
                "p1",
                format!(
                    "need 0 < p1_bar < p1 < 1, got p1 = {}, p1_bar = {}",
                    self.p1, self.p1_bar
                ),
            ));
        }
        Ok(())
    }
}

/// Binary sensor outputs at one time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    bits: Vec<bool>,
}

impl Observation {
    pub fn new(bits: &[u8]) -> Result<Self, ModelError> {
        let bits = bits
            .iter()
            .enumerate()
            .map(|(index, &value)| match value {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(ModelError::InvalidBit { index, value }),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { bits })
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Simulated signal and observations. `states[n-1]` and `observations[n-1]`
/// belong to time `n`; `initial` is the unobserved state at time 0.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: StateVector,
    pub states: Vec<StateVector>,
    pub observations: Vec<Observation>,
}

/// Per-sensor log-likelihood factors, indexed `[in_range][bit]`.
#[derive(Debug, Clone, Copy)]
struct LogFactors {
    table: [[f64; 2]; 2],
}

/// Validated tracking model.
///
/// Sampling draws, in order: for the prior, `r` uniform (x then y) followed by
/// two velocity normals; for a transition, four perturbation normals
/// (position x, y, velocity x, y) and, only on rejection, two velocity normals.
#[derive(Debug, Clone)]
pub struct TrackingModel {
    params: TrackingModelParams,
    position_noise: Normal<f64>,
    velocity_noise: Normal<f64>,
    initial_velocity: Normal<f64>,
    mu2: f64,
    factors: LogFactors,
}

impl TrackingModel {
    pub fn new(params: TrackingModelParams) -> Result<Self, ModelError> {
        params.validate()?;
        let k = params.kappa;
        let normal = |var: f64, name: &'static str| {
            Normal::new(0.0, var.sqrt()).map_err(|e| invalid(name, e.to_string()))
        };
        let position_noise = normal(k * k * params.sigma_v2 + params.sigma_r2, "sigma_r2")?;
        let velocity_noise = normal(params.sigma_v2, "sigma_v2")?;
        let initial_velocity = normal(params.sigma_v0_2, "sigma_v0_2")?;
        let factors = LogFactors {
            table: [
                [(1.0 - params.p1_bar).ln(), params.p1_bar.ln()],
                [(1.0 - params.p1).ln(), params.p1.ln()],
            ],
        };
        Ok(Self {
            mu2: params.mu * params.mu,
            params,
            position_noise,
            velocity_noise,
            initial_velocity,
            factors,
        })
    }

    pub fn params(&self) -> &TrackingModelParams {
        &self.params
    }

    pub fn n_sensors(&self) -> usize {
        self.params.sensors.len()
    }

    pub fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        let reg = &self.params.region;
        let x = reg.x_min + reg.width() * rng.random::<f64>();
        let y = reg.y_min + reg.height() * rng.random::<f64>();
        let vx = self.initial_velocity.sample(rng);
        let vy = self.initial_velocity.sample(rng);
        StateVector::new([x, y], [vx, vy])
    }

    /// Draws `x_n | x_{n-1}`. The previous position must lie in the region.
    pub fn sample_transition<R: Rng + ?Sized>(
        &self,
        prev: &StateVector,
        rng: &mut R,
    ) -> Result<StateVector, ModelError> {
        if !self.params.region.contains(prev.r) {
            return Err(ModelError::OutsideRegion {
                x: prev.r[0],
                y: prev.r[1],
            });
        }
        Ok(self.transition_traced(prev, rng).0)
    }

    /// Transition plus a flag telling whether the reset branch was taken.
    pub(crate) fn transition_traced<R: Rng + ?Sized>(
        &self,
        prev: &StateVector,
        rng: &mut R,
    ) -> (StateVector, bool) {
        let k = self.params.kappa;
        let er_x = self.position_noise.sample(rng);
        let er_y = self.position_noise.sample(rng);
        let ev_x = self.velocity_noise.sample(rng);
        let ev_y = self.velocity_noise.sample(rng);
        let r = [prev.r[0] + k * prev.v[0] + er_x, prev.r[1] + k * prev.v[1] + er_y];
        if self.params.region.contains(r) {
            (StateVector::new(r, [prev.v[0] + ev_x, prev.v[1] + ev_y]), false)
        } else {
            let u = [
                self.initial_velocity.sample(rng),
                self.initial_velocity.sample(rng),
            ];
            (StateVector::new(prev.r, u), true)
        }
    }

    fn in_range(&self, r: [f64; 2], sensor: [f64; 2]) -> bool {
        let dx = r[0] - sensor[0];
        let dy = r[1] - sensor[1];
        dx * dx + dy * dy <= self.mu2
    }

    pub fn log_likelihood(&self, x: &StateVector, y: &Observation) -> Result<f64, ModelError> {
        self.check_len(y)?;
        Ok(self.log_likelihood_unchecked(x, y))
    }

    fn check_len(&self, y: &Observation) -> Result<(), ModelError> {
        if y.len() != self.n_sensors() {
            return Err(ModelError::ObservationLength {
                expected: self.n_sensors(),
                got: y.len(),
            });
        }
        Ok(())
    }

    fn log_likelihood_unchecked(&self, x: &StateVector, y: &Observation) -> f64 {
        self.params
            .sensors
            .iter()
            .zip(y.bits())
            .map(|(&s, &bit)| self.factors.table[self.in_range(x.r, s) as usize][bit as usize])
            .sum()
    }

    /// Probability that sensor `j` outputs 1 given position `r`.
    pub fn detection_probability(&self, r: [f64; 2], j: usize) -> f64 {
        if self.in_range(r, self.params.sensors[j]) {
            self.params.p1
        } else {
            self.params.p1_bar
        }
    }

    pub fn observe<R: Rng + ?Sized>(&self, x: &StateVector, rng: &mut R) -> Observation {
        let bits = (0..self.n_sensors())
            .map(|j| rng.random::<f64>() < self.detection_probability(x.r, j))
            .collect();
        Observation::from_bools(bits)
    }

    /// Simulates `x_0`, then `n_steps` transitions each followed by an observation.
    pub fn simulate_trajectory<R: Rng + ?Sized>(&self, n_steps: usize, rng: &mut R) -> Trajectory {
        let initial = self.sample_prior(rng);
        let mut states = Vec::with_capacity(n_steps);
        let mut observations = Vec::with_capacity(n_steps);
        let mut x = initial;
        for _ in 0..n_steps {
            x = self.transition_traced(&x, rng).0;
            observations.push(self.observe(&x, rng));
            states.push(x);
        }
        Trajectory {
            initial,
            states,
            observations,
        }
    }

    /// Per-sensor likelihood factor range `[min, max]`.
    pub fn factor_bounds(&self) -> (f64, f64) {
        let p = &self.params;
        (
            p.p1_bar.min(1.0 - p.p1),
            p.p1.max(1.0 - p.p1_bar),
        )
    }

    /// Smallest `a` with `1/a <= g(y|x) <= a` for all states and observations.
    pub fn likelihood_bound(&self) -> f64 {
        let (lo, hi) = self.factor_bounds();
        let j = self.n_sensors() as i32;
        hi.powi(j).max(lo.powi(j).recip())
    }
}

impl StateSpaceModel for TrackingModel {
    type State = StateVector;
    type Observation = Observation;

    fn check_observation(&self, y: &Observation) -> Result<(), ModelError> {
        self.check_len(y)
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        self.sample_prior(rng)
    }

    fn sample_next<R: Rng + ?Sized>(&self, prev: &StateVector, rng: &mut R) -> StateVector {
        debug_assert!(self.params.region.contains(prev.r));
        self.transition_traced(prev, rng).0
    }

    fn log_likelihood_of(&self, x: &StateVector, y: &Observation) -> f64 {
        self.log_likelihood_unchecked(x, y)
    }
}

#[derive(Debug, Deserialize)]
struct SensorRow {
    #[allow(dead_code)]
    sensor_id: String,
    x: f64,
    y: f64,
}

/// Reads a `sensor_id,x,y` CSV into sensor positions, in file order.
pub fn load_sensor_layout(path: impl AsRef<Path>) -> Result<Vec<[f64; 2]>, ModelError> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| ModelError::SensorLayout(format!("{}: {e}", path.display())))?;
    let mut sensors = Vec::new();
    for row in reader.deserialize::<SensorRow>() {
        let row = row.map_err(|e| ModelError::SensorLayout(format!("{}: {e}", path.display())))?;
        sensors.push([row.x, row.y]);
    }
    if sensors.is_empty() {
        return Err(ModelError::SensorLayout(format!(
            "{}: no sensors listed",
            path.display()
        )));
    }
    Ok(sensors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedPlan;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> TrackingModel {
        TrackingModel::new(TrackingModelParams::default()).unwrap()
    }

    fn single_sensor(at: [f64; 2]) -> TrackingModel {
        TrackingModel::new(TrackingModelParams {
            sensors: vec![at],
            ..Default::default()
        })
        .unwrap()
    }

    fn noiseless() -> TrackingModel {
        TrackingModel::new(TrackingModelParams {
            sigma_r2: 1e-30,
            sigma_v2: 1e-30,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn default_layout_is_six_by_three_grid() {
        let s = TrackingModelParams::default().sensors;
        assert_eq!(s.len(), 18);
        assert!((s[0][0] + 16.6667).abs() < 1e-3 && (s[0][1] + 6.6667).abs() < 1e-3);
        assert!((s[17][0] - 16.6667).abs() < 1e-3 && (s[17][1] - 6.6667).abs() < 1e-3);
        assert!((s[7][0] + 10.0).abs() < 1e-12 && s[7][1].abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let bad = |f: fn(&mut TrackingModelParams)| {
            let mut p = TrackingModelParams::default();
            f(&mut p);
            TrackingModel::new(p).is_err()
        };
        assert!(bad(|p| p.p1_bar = 0.95));
        assert!(bad(|p| p.p1 = 1.0));
        assert!(bad(|p| p.p1_bar = 0.0));
        assert!(bad(|p| p.mu = 0.0));
        assert!(bad(|p| p.sigma_v2 = 0.0));
        assert!(bad(|p| p.sensors.clear()));
    }

    #[test]
    fn degenerate_initial_velocity() {
        let m = TrackingModel::new(TrackingModelParams {
            sigma_v0_2: 1e-30,
            ..Default::default()
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = m.sample_prior(&mut rng);
            assert!(x.v[0].hypot(x.v[1]) < 1e-10);
        }
    }

    #[test]
    fn prior_moments() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let (mut sx, mut sy, mut svx, mut svx2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = m.sample_prior(&mut rng);
            assert!(m.params().region.contains(x.r));
            sx += x.r[0];
            sy += x.r[1];
            svx += x.v[0];
            svx2 += x.v[0] * x.v[0];
        }
        let nf = n as f64;
        assert!((sx / nf).abs() < 0.2 && (sy / nf).abs() < 0.2);
        let mean_v = svx / nf;
        let var_v = svx2 / nf - mean_v * mean_v;
        assert!((var_v - 2.5e-3).abs() < 0.1 * 2.5e-3, "var {var_v}");
    }

    #[test]
    fn noiseless_constant_velocity_step() {
        let m = noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = m
            .sample_transition(&StateVector::new([0.0, 0.0], [1.0, 0.0]), &mut rng)
            .unwrap();
        assert!((x.r[0] - 1.0).abs() < 1e-10 && x.r[1].abs() < 1e-10);
        assert!((x.v[0] - 1.0).abs() < 1e-10 && x.v[1].abs() < 1e-10);
    }

    #[test]
    fn forced_reset_keeps_position() {
        let m = noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let prev = StateVector::new([19.99, 0.0], [10.0, 0.0]);
        let (x, reset) = m.transition_traced(&prev, &mut rng);
        assert!(reset);
        assert_eq!(x.r, prev.r);
        // redrawn velocity ~ N(0, 2.5e-3): far from the old 10 m/step
        assert!(x.v[0].abs() < 1.0 && x.v[1].abs() < 1.0);
    }

    #[test]
    fn transition_outside_region_is_contract_error() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let err = m
            .sample_transition(&StateVector::new([25.0, 0.0], [0.0, 0.0]), &mut rng)
            .unwrap_err();
        assert!(matches!(err, ModelError::OutsideRegion { .. }));
    }

    /// Straightforward re-implementation of the reset test, used as a
    /// second sampler: one Gaussian position perturbation per axis.
    fn reference_resets(prev: StateVector, n: usize, seed: u64) -> usize {
        let p = TrackingModelParams::default();
        let sd = (p.kappa * p.kappa * p.sigma_v2 + p.sigma_r2).sqrt();
        let noise = Normal::new(0.0, sd).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .filter(|_| {
                let x = prev.r[0] + p.kappa * prev.v[0] + noise.sample(&mut rng);
                let y = prev.r[1] + p.kappa * prev.v[1] + noise.sample(&mut rng);
                !(-20.0..=20.0).contains(&x) || !(-10.0..=10.0).contains(&y)
            })
            .count()
    }

    #[test]
    fn reset_rate_matches_independent_sampler() {
        let m = model();
        let prev = StateVector::new([19.9, 0.0], [0.0, 0.0]);
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ours = (0..n)
            .filter(|_| m.transition_traced(&prev, &mut rng).1)
            .count();
        let theirs = reference_resets(prev, n, 99);
        let (p1, p2) = (ours as f64 / n as f64, theirs as f64 / n as f64);
        let pooled = (p1 + p2) / 2.0;
        let sd = (2.0 * pooled * (1.0 - pooled) / n as f64).sqrt();
        assert!((p1 - p2).abs() < 3.0 * sd, "{p1} vs {p2}");
        // both near P(N(0, 0.02) > 0.1) ~ 0.24
        assert!((0.2..0.28).contains(&p1));
    }

    #[test]
    fn reset_rule_keeps_targets_inside() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut x = m.sample_prior(&mut rng);
        for _ in 0..100_000 {
            x = m.sample_transition(&x, &mut rng).unwrap();
            assert!(m.params().region.contains(x.r));
        }
    }

    #[test]
    fn likelihood_branch_values() {
        let m = single_sensor([0.0, 0.0]);
        let at = StateVector::new([0.0, 0.0], [0.0, 0.0]);
        let far = StateVector::new([10.0, 0.0], [0.0, 0.0]);
        let one = Observation::new(&[1]).unwrap();
        assert!((m.log_likelihood(&at, &one).unwrap() - 0.9f64.ln()).abs() < 1e-15);
        assert!((m.log_likelihood(&far, &one).unwrap() - 0.01f64.ln()).abs() < 1e-15);

        let two = TrackingModel::new(TrackingModelParams {
            sensors: vec![[0.0, 0.0], [15.0, 0.0]],
            ..Default::default()
        })
        .unwrap();
        let zeros = Observation::new(&[0, 0]).unwrap();
        let expected = 0.1f64.ln() + 0.99f64.ln();
        assert!((two.log_likelihood(&at, &zeros).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn boundary_distance_counts_as_in_range() {
        let m = single_sensor([0.0, 0.0]);
        let edge = StateVector::new([7.0, 0.0], [0.0, 0.0]);
        let one = Observation::new(&[1]).unwrap();
        assert_eq!(m.log_likelihood(&edge, &one).unwrap(), 0.9f64.ln());
    }

    #[test]
    fn likelihood_length_mismatch() {
        let m = model();
        let y = Observation::new(&[1, 0]).unwrap();
        assert!(matches!(
            m.log_likelihood(&StateVector::default(), &y),
            Err(ModelError::ObservationLength { expected: 18, got: 2 })
        ));
        assert!(Observation::new(&[2]).is_err());
    }

    #[test]
    fn likelihood_bounds_and_factorization() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let j = m.n_sensors();
        let (lo, hi) = (j as f64 * 0.01f64.ln(), j as f64 * 0.99f64.ln());
        for _ in 0..10_000 {
            let x = m.sample_prior(&mut rng);
            let bits: Vec<bool> = (0..j).map(|_| rng.random()).collect();
            let y = Observation::from_bools(bits.clone());
            let ll = m.log_likelihood(&x, &y).unwrap();
            assert!(ll >= lo - 1e-12 && ll <= hi + 1e-12);
            let split: f64 = (0..j)
                .map(|i| {
                    single_sensor(m.params().sensors[i])
                        .log_likelihood(&x, &Observation::from_bools(vec![bits[i]]))
                        .unwrap()
                })
                .sum();
            assert!((ll - split).abs() < 1e-12);
        }
        assert_eq!(m.factor_bounds(), (0.01, 0.99));
    }

    #[test]
    fn trajectory_shapes_and_confinement() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = m.simulate_trajectory(1, &mut rng);
        assert_eq!(t.states.len(), 1);
        assert_eq!(t.observations.len(), 1);
        assert_eq!(t.observations[0].len(), 18);

        let t = m.simulate_trajectory(100, &mut rng);
        assert!(t.states.iter().all(|x| m.params().region.contains(x.r)));
    }

    #[test]
    fn deterministic_sensors() {
        // p1 = 1, p1_bar = 0 are outside the validated range; build directly.
        let mut m = model();
        m.params.p1 = 1.0;
        m.params.p1_bar = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let t = m.simulate_trajectory(200, &mut rng);
        for (x, y) in t.states.iter().zip(&t.observations) {
            for (j, &bit) in y.bits().iter().enumerate() {
                let s = m.params().sensors[j];
                let d = (x.r[0] - s[0]).hypot(x.r[1] - s[1]);
                assert_eq!(bit, d <= 7.0);
            }
        }
    }

    #[test]
    fn identical_seeds_identical_trajectories() {
        let m = model();
        let plan = SeedPlan::new(11);
        let a = m.simulate_trajectory(500, &mut plan.trajectory(0));
        let b = m.simulate_trajectory(500, &mut plan.trajectory(0));
        assert_eq!(a.states, b.states);
        assert_eq!(a.observations, b.observations);
    }

    #[test]
    fn sensor_layout_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sensors.csv");
        std::fs::write(&path, "sensor_id,x,y\ns1,1.5,-2\ns2,0,3\n").unwrap();
        assert_eq!(load_sensor_layout(&path).unwrap(), vec![[1.5, -2.0], [0.0, 3.0]]);
        std::fs::write(&path, "sensor_id,x,y\n").unwrap();
        assert!(load_sensor_layout(&path).is_err());
    }
}
