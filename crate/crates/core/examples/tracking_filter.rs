//! Track a target through the binary sensor field with 16 PEs and print
//! the estimate next to the true position every 10 steps.
//!
//!     cargo run --example tracking_filter

use drna::engine::{run_filter, FnSink};
use drna::experiments::EngineConfig;
use drna::{FilterState, SeedPlan, TrackingModel, TrackingModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = TrackingModel::new(TrackingModelParams::default())?;
    let plan = SeedPlan::new(2024);
    let traj = model.simulate_trajectory(100, &mut plan.trajectory(0));

    let config = EngineConfig::new(16, 128, 10);
    let mut streams = plan.pe_streams(0, config.stream_tag(), config.m_pes);
    let mut state = FilterState::init(
        &model,
        config.k_per_pe,
        config.exchange_period,
        config.exchange_map()?,
        &mut streams,
    )?;

    println!("{:>4} {:>16} {:>16} {:>7} {:>6}", "n", "true r", "estimate", "error", "sup W");
    let mut sink = FnSink(|rec: drna::StepRecord| {
        if rec.step == 0 || !rec.step.is_multiple_of(10) {
            return;
        }
        let truth = traj.states[rec.step - 1].r;
        let err = (rec.estimate[0] - truth[0]).hypot(rec.estimate[1] - truth[1]);
        println!(
            "{:>4} ({:>6.2},{:>6.2}) ({:>6.2},{:>6.2}) {:>7.3} {:>6.3}{}",
            rec.step,
            truth[0],
            truth[1],
            rec.estimate[0],
            rec.estimate[1],
            err,
            rec.sup_aggregate,
            if rec.exchanged { "  exchanged" } else { "" }
        );
    });
    run_filter(&model, &mut state, &mut streams, &traj.observations, &mut sink)?;
    Ok(())
}
