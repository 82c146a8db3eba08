//! Command-line front end.
//!
//! Settings come from an optional TOML file (`--config`) with flags on top.
//! Exit codes: 0 success, 1 usage or configuration error, 2 a check ran and
//! failed, 3 runtime failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::experiments::{
    assumption_bound, estimate_sup_moment, fit_rate, l2_error_series, oracle_convergence,
    oracle_test_model, output, rate_sweep, AssumptionCheckParams, EngineConfig, ErrorNorm,
    ExperimentError, RateReading, RateSweepConfig, Reference,
};
use crate::model::{load_sensor_layout, ModelError, TrackingModel, TrackingModelParams};
use crate::rng::SeedPlan;
use crate::topology::{default_degree, TopologyKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Accepted band for the fitted exponent.
pub const ZETA_BAND: (f64, f64) = (0.29, 0.59);
/// Largest mean worst-case error allowed at the biggest oracle-check size.
pub const ORACLE_MAX_ERROR: f64 = 0.05;
/// Accepted error ratio per 4x particle increase (2 +/- 30%).
pub const ORACLE_RATIO_BAND: (f64, f64) = (1.4, 2.6);

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("config file {path}: {reason}")]
    ConfigFile { path: PathBuf, reason: String },
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("output {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::ConfigFile { .. } | CliError::Model(_) => {
                EXIT_CONFIG
            }
            _ => EXIT_RUNTIME,
        }
    }
}

fn config_err(field: &'static str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field,
        reason: reason.into(),
    }
}

/// Result of a subcommand that completed without crashing.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success(String),
    CheckFailed(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Success(_) => EXIT_OK,
            Outcome::CheckFailed(_) => EXIT_CHECK_FAILED,
        }
    }

    pub fn summary(&self) -> &str {
        match self {
            Outcome::Success(s) | Outcome::CheckFailed(s) => s,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "drna", version, about = "Distributed particle filter experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// L2 position error against the true state; writes errors.csv and runs.csv.
    RunTracking(CommonArgs),
    /// Moment of the largest normalized aggregate weight; writes sup_moment.csv.
    RunAssumptionCheck(CommonArgs),
    /// Power-law fit of errors over a sweep of PE counts; writes rate_fit.csv.
    RunRateFit(CommonArgs),
    /// Convergence to the exact filter of a 3-state HMM; writes oracle_check.csv.
    RunOracleCheck(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::RunTracking(a)
            | Command::RunAssumptionCheck(a)
            | Command::RunRateFit(a)
            | Command::RunOracleCheck(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Number of processing elements M.
    #[arg(long)]
    pub pes: Option<usize>,
    /// Particles per PE K.
    #[arg(long)]
    pub k: Option<usize>,
    /// Exchange period n0.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Time steps per run.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Independent Monte Carlo runs.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub topology: Option<TopologyKind>,
    /// Particles swapped with each neighbor.
    #[arg(long)]
    pub per_neighbor: Option<usize>,
    /// Fraction of each PE's particles to swap, split across neighbors.
    #[arg(long)]
    pub exchange_fraction: Option<f64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML configuration file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sensor layout CSV with columns sensor_id,x,y.
    #[arg(long)]
    pub sensors: Option<PathBuf>,
    /// PE counts for the rate fit, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<usize>>,
    /// Particles per PE values for the oracle check, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k_list: Option<Vec<usize>>,
    /// Step at which rate-fit errors are measured (default: --steps).
    #[arg(long)]
    pub eval_step: Option<usize>,
    /// Particles in the centralized proxy (default: largest M times K).
    #[arg(long)]
    pub proxy_particles: Option<usize>,
    /// Reading of N in C / (M^zeta N^(1/2)).
    #[arg(long, value_enum)]
    pub rate_reading: Option<RateReading>,
    /// Include velocity components in the error norm.
    #[arg(long)]
    pub full_state_error: bool,
    /// Also run a centralized filter with M*K particles (run-tracking).
    #[arg(long)]
    pub compare_centralized: bool,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub m_pes: usize,
    pub k_per_pe: usize,
    pub exchange_period: usize,
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
    pub topology: TopologyKind,
    pub per_neighbor: Option<usize>,
    pub exchange_fraction: Option<f64>,
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub model: TrackingModelParams,
    pub sensors_csv: Option<PathBuf>,
    pub m_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub eval_step: Option<usize>,
    pub proxy_particles: Option<usize>,
    pub rate_reading: RateReading,
    pub full_state_error: bool,
    pub compare_centralized: bool,
    pub c: f64,
    pub q: f64,
    pub epsilon: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m_pes: 32,
            k_per_pe: 256,
            exchange_period: 10,
            horizon: 1000,
            runs: 50,
            seed: 7,
            topology: TopologyKind::HavelHakimi,
            per_neighbor: None,
            exchange_fraction: None,
            workers: None,
            out: PathBuf::from("out"),
            model: TrackingModelParams::default(),
            sensors_csv: None,
            m_list: vec![4, 8, 16, 32],
            k_list: vec![64, 256, 1024],
            eval_step: None,
            proxy_particles: None,
            rate_reading: RateReading::PerPe,
            full_state_error: false,
            compare_centralized: false,
            c: 4.0,
            q: 4.0,
            epsilon: 0.5,
        }
    }
}

impl RunConfig {
    /// Defaults from the file (if any), then flags.
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        macro_rules! take {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = args.$flag.clone() { cfg.$field = v; })*
            };
        }
        take!(pes => m_pes, k => k_per_pe, n0 => exchange_period, steps => horizon,
              runs => runs, seed => seed, topology => topology, out => out,
              m_list => m_list, k_list => k_list, rate_reading => rate_reading,
              c => c, q => q, epsilon => epsilon);
        if args.per_neighbor.is_some() {
            cfg.per_neighbor = args.per_neighbor;
        }
        if args.exchange_fraction.is_some() {
            cfg.exchange_fraction = args.exchange_fraction;
        }
        if args.workers.is_some() {
            cfg.workers = args.workers;
        }
        if args.sensors.is_some() {
            cfg.sensors_csv = args.sensors.clone();
        }
        if args.eval_step.is_some() {
            cfg.eval_step = args.eval_step;
        }
        if args.proxy_particles.is_some() {
            cfg.proxy_particles = args.proxy_particles;
        }
        cfg.full_state_error |= args.full_state_error;
        cfg.compare_centralized |= args.compare_centralized;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_owned(),
            reason: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (field, v) in [
            ("m_pes", self.m_pes),
            ("k_per_pe", self.k_per_pe),
            ("exchange_period", self.exchange_period),
            ("horizon", self.horizon),
            ("runs", self.runs),
        ] {
            if v == 0 {
                return Err(config_err(field, "must be at least 1"));
            }
        }
        if self.workers == Some(0) {
            return Err(config_err("workers", "must be at least 1"));
        }
        if let Some(f) = self.exchange_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(config_err("exchange_fraction", format!("{f} not in [0, 1]")));
            }
            if self.per_neighbor.is_some() {
                return Err(config_err(
                    "exchange_fraction",
                    "give either per_neighbor or exchange_fraction",
                ));
            }
        }
        if self.m_list.contains(&0) {
            return Err(config_err("m_list", "PE counts must be at least 1"));
        }
        if self.k_list.contains(&0) {
            return Err(config_err("k_list", "particle counts must be at least 1"));
        }
        if self.eval_step == Some(0) {
            return Err(config_err("eval_step", "must be at least 1"));
        }
        if self.proxy_particles == Some(0) {
            return Err(config_err("proxy_particles", "must be at least 1"));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<TrackingModel, CliError> {
        let mut params = self.model.clone();
        if let Some(path) = &self.sensors_csv {
            params.sensors = load_sensor_layout(path)?;
        }
        Ok(TrackingModel::new(params)?)
    }

    fn per_neighbor_for(&self, m_pes: usize) -> Option<usize> {
        match (self.per_neighbor, self.exchange_fraction) {
            (Some(p), _) => Some(p),
            (None, Some(f)) if m_pes > 1 => {
                let degree = default_degree(m_pes);
                Some((f * self.k_per_pe as f64 / degree as f64).floor() as usize)
            }
            _ => None,
        }
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            topology: self.topology,
            per_neighbor: self.per_neighbor_for(self.m_pes),
            ..EngineConfig::new(self.m_pes, self.k_per_pe, self.exchange_period)
        }
    }

    fn error_norm(&self) -> ErrorNorm {
        if self.full_state_error {
            ErrorNorm::FullState
        } else {
            ErrorNorm::Position
        }
    }

    fn plan(&self) -> SeedPlan {
        SeedPlan::new(self.seed)
    }
}

fn create_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_owned(),
        source,
    })
}

fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let path = dir.join(name);
    let wrap = |source| CliError::Output {
        path: path.clone(),
        source,
    };
    let file = File::create(&path).map_err(wrap)?;
    f(BufWriter::new(file)).map_err(wrap)
}

pub fn run_tracking(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    create_out(&cfg.out)?;
    let plan = cfg.plan();
    let norm = cfg.error_norm();
    let dpf = l2_error_series(
        &model,
        &cfg.engine(),
        cfg.horizon,
        cfg.runs,
        Reference::TrueState,
        norm,
        &plan,
    )?;
    let mut all = vec![dpf];
    if cfg.compare_centralized && cfg.m_pes > 1 {
        let central = EngineConfig::centralized(cfg.m_pes * cfg.k_per_pe);
        all.push(l2_error_series(
            &model,
            &central,
            cfg.horizon,
            cfg.runs,
            Reference::TrueState,
            norm,
            &plan,
        )?);
    }
    let refs: Vec<_> = all.iter().collect();
    write_file(&cfg.out, "errors.csv", |w| output::write_errors(w, &refs))?;
    write_file(&cfg.out, "runs.csv", |w| output::write_run_summaries(w, &refs))?;
    let summary = all
        .iter()
        .map(|s| {
            format!(
                "M={} K={}: time-averaged L2 error {:.4}",
                s.m_pes,
                s.k_per_pe,
                s.mean()
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome::Success(summary))
}

pub fn run_assumption_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let params = AssumptionCheckParams {
        c: cfg.c,
        q: cfg.q,
        epsilon: cfg.epsilon,
        m_pes: cfg.m_pes,
        exchange_period: cfg.exchange_period,
        runs: cfg.runs,
    };
    params.validate().map_err(|e| config_err("c/q/epsilon", e.to_string()))?;
    if cfg.runs < 2 {
        return Err(config_err("runs", "assumption check needs at least 2 runs"));
    }
    create_out(&cfg.out)?;
    let series = estimate_sup_moment(&model, &cfg.engine(), cfg.horizon, &params, &cfg.plan())?;
    write_file(&cfg.out, "sup_moment.csv", |w| output::write_sup_moment(w, &series))?;
    let exchanges = series.exchange_rows().count();
    let violations = series.violations();
    let bound = assumption_bound(&params);
    if violations.is_empty() {
        Ok(Outcome::Success(format!(
            "PASS: moment below bound {bound:.4e} at all {exchanges} exchange steps \
             (worst ratio {:.3})",
            series.worst_exchange_ratio()
        )))
    } else {
        Ok(Outcome::CheckFailed(format!(
            "FAIL: moment reaches bound {bound:.4e} at {} of {exchanges} exchange steps \
             (first at n = {})",
            violations.len(),
            violations[0]
        )))
    }
}

pub fn run_rate_fit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut distinct = cfg.m_list.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(config_err("m_list", "need at least 3 distinct PE counts"));
    }
    let model = cfg.model()?;
    let eval_step = cfg.eval_step.unwrap_or(cfg.horizon);
    let largest = distinct.last().copied().unwrap_or(1) * cfg.k_per_pe;
    let sweep = RateSweepConfig {
        m_values: cfg.m_list.clone(),
        k_per_pe: cfg.k_per_pe,
        exchange_period: cfg.exchange_period,
        topology: cfg.topology,
        eval_step,
        runs: cfg.runs,
        proxy_particles: cfg.proxy_particles.unwrap_or(largest),
        norm: cfg.error_norm(),
    };
    create_out(&cfg.out)?;
    let points = rate_sweep(&model, &sweep, &cfg.plan())?;
    let fit = fit_rate(&points, cfg.k_per_pe, cfg.rate_reading)?;
    write_file(&cfg.out, "rate_fit.csv", |w| output::write_rate_points(w, &points, &fit))?;
    write_file(&cfg.out, "rate_fit_summary.csv", |w| output::write_rate_summary(w, &fit))?;
    let msg = format!(
        "C = {:.4}, zeta = {:.4}, residual = {:.3e}",
        fit.c_fit, fit.zeta_fit, fit.residual
    );
    if (ZETA_BAND.0..=ZETA_BAND.1).contains(&fit.zeta_fit) {
        Ok(Outcome::Success(format!("PASS: {msg}")))
    } else {
        Ok(Outcome::CheckFailed(format!(
            "FAIL: {msg} (accepted zeta band [{}, {}])",
            ZETA_BAND.0, ZETA_BAND.1
        )))
    }
}

pub fn run_oracle_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut ks = cfg.k_list.clone();
    ks.sort_unstable();
    ks.dedup();
    create_out(&cfg.out)?;
    let rows = oracle_convergence(
        &oracle_test_model(),
        cfg.m_pes,
        &ks,
        cfg.exchange_period,
        cfg.horizon,
        cfg.runs,
        &cfg.plan(),
    )?;
    write_file(&cfg.out, "oracle_check.csv", |w| output::write_oracle_check(w, &rows))?;
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].mean_max_error < w[0].mean_max_error);
    let ratios_ok = rows.windows(2).all(|w| {
        let per_4x = (w[1].k_per_pe as f64 / w[0].k_per_pe as f64).log(4.0);
        let ratio = (w[0].mean_max_error / w[1].mean_max_error).powf(1.0 / per_4x);
        (ORACLE_RATIO_BAND.0..=ORACLE_RATIO_BAND.1).contains(&ratio)
    });
    let last = rows.last().map_or(f64::INFINITY, |r| r.mean_max_error);
    let msg = rows
        .iter()
        .map(|r| format!("MK={}: {:.4}", r.total_particles(), r.mean_max_error))
        .collect::<Vec<_>>()
        .join(", ");
    if decreasing && ratios_ok && last < ORACLE_MAX_ERROR {
        Ok(Outcome::Success(format!("PASS: {msg}")))
    } else {
        Ok(Outcome::CheckFailed(format!("FAIL: {msg}")))
    }
}

/// Executes a parsed command on a worker pool of the configured size.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let cfg = RunConfig::resolve(command.args())?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    pool.install(|| match command {
        Command::RunTracking(_) => run_tracking(&cfg),
        Command::RunAssumptionCheck(_) => run_assumption_check(&cfg),
        Command::RunRateFit(_) => run_rate_fit(&cfg),
        Command::RunOracleCheck(_) => run_oracle_check(&cfg),
    })
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary());
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
