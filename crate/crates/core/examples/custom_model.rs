//! The engine is generic over `StateSpaceModel`. This example plugs in a
//! scalar linear-Gaussian model, where the Kalman filter gives the exact
//! posterior mean to compare against.
//!
//!     cargo run --example custom_model

use drna::engine::FilterState;
use drna::model::StateSpaceModel;
use drna::topology::{build_exchange_map, TopologyKind};
use drna::SeedPlan;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// `x_n = a x_{n-1} + q e_n`, `y_n = x_n + r d_n`, `x_0 ~ N(0, 1)`.
struct LinearGaussian {
    a: f64,
    q: f64,
    r: f64,
}

impl StateSpaceModel for LinearGaussian {
    type State = f64;
    type Observation = f64;

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Normal::new(0.0, 1.0).unwrap().sample(rng)
    }

    fn sample_next<R: Rng + ?Sized>(&self, x: &f64, rng: &mut R) -> f64 {
        self.a * x + self.q * Normal::new(0.0, 1.0).unwrap().sample(rng)
    }

    fn log_likelihood_of(&self, x: &f64, y: &f64) -> f64 {
        -0.5 * ((y - x) / self.r).powi(2)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = LinearGaussian { a: 0.9, q: 0.5, r: 0.8 };
    let plan = SeedPlan::new(4);
    let mut rng = plan.trajectory(0);
    let mut x = model.sample_initial(&mut rng);
    let ys: Vec<f64> = (0..40)
        .map(|_| {
            x = model.sample_next(&x, &mut rng);
            x + model.r * Normal::new(0.0, 1.0).unwrap().sample(&mut rng)
        })
        .collect();

    let (m, k) = (8, 256);
    let map = build_exchange_map(TopologyKind::HavelHakimi, m, k, None)?;
    let mut streams = plan.pe_streams(0, 0, m);
    let mut state = FilterState::init(&model, k, 4, map, &mut streams)?;
    let (mut mean, mut var) = (0.0, 1.0);
    println!("{:>3} {:>9} {:>9}", "n", "kalman", "DPF");
    for (n, y) in ys.iter().enumerate() {
        state.step(&model, y, &mut streams)?;
        let pm = model.a * mean;
        let pv = model.a * model.a * var + model.q * model.q;
        let gain = pv / (pv + model.r * model.r);
        mean = pm + gain * (y - pm);
        var = (1.0 - gain) * pv;
        if (n + 1) % 5 == 0 {
            println!("{:>3} {:>9.4} {:>9.4}", n + 1, mean, state.estimate_integral(|x| *x));
        }
    }
    Ok(())
}
