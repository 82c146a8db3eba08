//! Errors against the true state of a distributed filter and of a
//! centralized bootstrap filter with the same total particle count, on the
//! same trajectories.
//!
//!     cargo run --release --example dpf_vs_centralized

use drna::experiments::{l2_error_series, EngineConfig, ErrorNorm, Reference};
use drna::{SeedPlan, TrackingModel, TrackingModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = TrackingModel::new(TrackingModelParams::default())?;
    let plan = SeedPlan::new(5);
    let (horizon, runs) = (300, 12);
    let dpf = EngineConfig::new(16, 128, 10);
    let central = EngineConfig::centralized(dpf.total_particles());
    let a = l2_error_series(&model, &dpf, horizon, runs, Reference::TrueState, ErrorNorm::Position, &plan)?;
    let b = l2_error_series(&model, &central, horizon, runs, Reference::TrueState, ErrorNorm::Position, &plan)?;
    println!("{:>5} {:>10} {:>12}", "n", "DPF", "centralized");
    for n in (30..=horizon).step_by(30) {
        println!("{n:>5} {:>10.4} {:>12.4}", a.at(n), b.at(n));
    }
    println!("mean  {:>10.4} {:>12.4}", a.mean(), b.mean());
    Ok(())
}
