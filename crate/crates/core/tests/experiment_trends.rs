use drna::experiments::{
    estimate_sup_moment, l2_error_series, AssumptionCheckParams, EngineConfig, ErrorNorm,
    Reference,
};
use drna::model::{TrackingModel, TrackingModelParams};
use drna::rng::SeedPlan;

fn model() -> TrackingModel {
    TrackingModel::new(TrackingModelParams::default()).unwrap()
}

/// The moment of the largest aggregate at `n = 100 n0` falls as `M` grows
/// and the bound's margin over it widens.
#[test]
fn sup_moment_trend_in_m() {
    let model = model();
    let plan = SeedPlan::new(5);
    let n0 = 10;
    let horizon = 100 * n0;
    let mut last: Option<(f64, f64)> = None;
    for m in [8, 16, 32] {
        let params = AssumptionCheckParams::standard(m, n0, 12);
        let series =
            estimate_sup_moment(&model, &EngineConfig::new(m, 64, n0), horizon, &params, &plan)
                .unwrap();
        let row = series.rows[horizon];
        assert!(row.is_exchange_step);
        let ratio = row.bound / row.moment_estimate;
        if let Some((prev_moment, prev_ratio)) = last {
            assert!(row.moment_estimate < prev_moment, "M = {m}");
            assert!(ratio > prev_ratio, "M = {m}");
        }
        last = Some((row.moment_estimate, ratio));
    }
}

/// A centralized filter with the same 2^13 particles has errors against the
/// true state comparable to the DPF's, window by window.
#[test]
fn centralized_proxy_tracks_dpf_error() {
    let model = model();
    let plan = SeedPlan::new(6);
    let (horizon, runs) = (200, 10);
    let dpf = EngineConfig::new(32, 256, 10);
    let central = EngineConfig::centralized(dpf.total_particles());
    let run = |cfg: &EngineConfig| {
        l2_error_series(&model, cfg, horizon, runs, Reference::TrueState, ErrorNorm::Position, &plan)
            .unwrap()
    };
    let (a, b) = (run(&dpf), run(&central));
    for w in 0..horizon / 20 {
        let window = |s: &drna::experiments::ErrorSeries| {
            s.errors[w * 20..(w + 1) * 20].iter().sum::<f64>()
        };
        let ratio = window(&a) / window(&b);
        assert!((0.5..=2.0).contains(&ratio), "window {w}: ratio {ratio}");
    }
}
