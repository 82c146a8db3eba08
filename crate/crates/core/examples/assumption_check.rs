//! Estimate the fourth moment of the largest normalized aggregate weight and
//! compare it with the bound c^q / M^(q - eps) for several PE counts.
//!
//!     cargo run --release --example assumption_check

use drna::experiments::{estimate_sup_moment, AssumptionCheckParams, EngineConfig};
use drna::{SeedPlan, TrackingModel, TrackingModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = TrackingModel::new(TrackingModelParams::default())?;
    let plan = SeedPlan::new(1);
    let (n0, horizon, runs) = (10, 200, 10);
    println!("{:>4} {:>12} {:>12} {:>8}", "M", "moment", "bound", "ratio");
    for m in [8, 16, 32, 64] {
        let params = AssumptionCheckParams::standard(m, n0, runs);
        let series =
            estimate_sup_moment(&model, &EngineConfig::new(m, 128, n0), horizon, &params, &plan)?;
        let last = series.rows[horizon];
        println!(
            "{:>4} {:>12.4e} {:>12.4e} {:>8.1}  violations: {}",
            m,
            last.moment_estimate,
            last.bound,
            last.bound / last.moment_estimate,
            series.violations().len()
        );
    }
    Ok(())
}
