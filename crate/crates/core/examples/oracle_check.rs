//! Compare the distributed filter on a 3-state HMM with the exact forward
//! filter, for growing particle counts.
//!
//!     cargo run --release --example oracle_check

use drna::experiments::{oracle_convergence, oracle_test_model};
use drna::oracle::exact_filter_sequence;
use drna::{FilterState, SeedPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = oracle_test_model();
    let plan = SeedPlan::new(9);

    // one run in detail
    let trace = model.sample_and_observe(10, &mut plan.trajectory(0));
    let exact = exact_filter_sequence(&model, &trace.observations)?;
    let map = drna::topology::build_exchange_map(drna::TopologyKind::HavelHakimi, 4, 256, None)?;
    let mut streams = plan.pe_streams(0, 1, 4);
    let mut state = FilterState::init(&model, 256, 5, map, &mut streams)?;
    println!("n  y  exact P(x=0..2)          DPF estimate");
    for (n, y) in trace.observations.iter().enumerate() {
        state.step(&model, y, &mut streams)?;
        let est: Vec<f64> = (0..3)
            .map(|s| state.estimate_integral(|x| (*x == s) as u8 as f64))
            .collect();
        let p = exact[n + 1].probabilities();
        println!(
            "{:<2} {}  [{:.3} {:.3} {:.3}]  [{:.3} {:.3} {:.3}]",
            n + 1,
            y,
            p[0],
            p[1],
            p[2],
            est[0],
            est[1],
            est[2]
        );
    }

    println!("\nmean worst-case error over 50 steps, 40 runs:");
    for row in oracle_convergence(&model, 4, &[16, 64, 256, 1024], 5, 50, 40, &plan)? {
        println!("  MK = {:>5}: {:.4}", row.total_particles(), row.mean_max_error);
    }
    Ok(())
}
