//! Sweep the number of PEs at fixed K, measure errors against a large
//! centralized proxy filter and fit e = C / (M^zeta K^(1/2)). Sizes are
//! small so this finishes in seconds; the fitted exponent is noisy here.
//!
//!     cargo run --release --example rate_fit

use drna::experiments::{fit_rate, rate_sweep, ErrorNorm, RateReading, RateSweepConfig};
use drna::topology::TopologyKind;
use drna::{SeedPlan, TrackingModel, TrackingModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = TrackingModel::new(TrackingModelParams::default())?;
    let cfg = RateSweepConfig {
        m_values: vec![4, 8, 16, 32],
        k_per_pe: 64,
        exchange_period: 10,
        topology: TopologyKind::HavelHakimi,
        eval_step: 300,
        runs: 16,
        proxy_particles: 4096,
        norm: ErrorNorm::Position,
    };
    let points = rate_sweep(&model, &cfg, &SeedPlan::new(3))?;
    for reading in [RateReading::PerPe, RateReading::Total] {
        let fit = fit_rate(&points, cfg.k_per_pe, reading)?;
        println!(
            "{reading:?}: C = {:.3}, zeta = {:.3}, residual = {:.2e}",
            fit.c_fit, fit.zeta_fit, fit.residual
        );
        for &(m, e) in &points {
            println!("  M = {m:>3}: error {e:.4}, fitted {:.4}", fit.fitted(m));
        }
    }
    Ok(())
}
