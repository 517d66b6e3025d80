//! Executing configs: single runs, sweeps and restarts, with their files.
//!
//! Each run directory holds `diagnostics.csv`, `summary.json`, `rates.csv`
//! and `final.snap` (plus `checkpoint_KKKK.snap` files when enabled).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hyperflow_core::diagnostics::{
    boundedness_monitor, decay_rate_fit, BoundednessReport, Quantity, RateFit, CSV_COLUMNS,
};
use hyperflow_core::flow::{resume, FlowState, RunOutput};
use hyperflow_core::geometry::{read_snapshot, write_snapshot};
use hyperflow_core::Error as CoreError;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Mode};

pub const EXIT_OK: i32 = 0;
/// A theorem-mode run completed but left its spherical barriers.
pub const EXIT_UNHEALTHY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONVEXITY: i32 = 3;
/// Stability failure, or a snapshot that cannot be restarted from.
pub const EXIT_STABILITY: i32 = 4;

/// Environment variable overriding the sweep worker count.
pub const WORKERS_ENV: &str = "HYPERFLOW_WORKERS";

/// Quantities fitted into the rates table and summary.
pub const FITTED: [Quantity; 4] =
    [Quantity::VMaxMinus1, Quantity::CothUMinus1, Quantity::CauchyUTilde, Quantity::TracelessNorm];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("snapshot {}: {source}", path.display())]
    Snapshot { path: PathBuf, source: CoreError },
    #[error(transparent)]
    Flow(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Snapshot { .. } => EXIT_STABILITY,
            _ => EXIT_CONFIG,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Outcome of one grid point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub p: f64,
    pub a: f64,
    pub output: RunOutput,
    pub rates: BTreeMap<&'static str, Result<RateFit, String>>,
    pub boundedness: BoundednessReport,
    pub runtime_seconds: f64,
    pub exit_code: i32,
    pub dir: PathBuf,
}

impl PointResult {
    pub fn rate(&self, q: Quantity) -> Option<&RateFit> {
        self.rates.get(q.name()).and_then(|r| r.as_ref().ok())
    }
}

fn point_exit_code(mode: Mode, out: &RunOutput) -> i32 {
    if mode == Mode::Exploratory {
        return EXIT_OK;
    }
    match &out.abort {
        Some(CoreError::ConvexityLost { .. }) => EXIT_CONVEXITY,
        Some(_) => EXIT_STABILITY,
        None if !out.final_state.health.barrier_ok => EXIT_UNHEALTHY,
        None => EXIT_OK,
    }
}

/// Diagnostics CSV with the fixed column order.
pub fn diagnostics_csv(out: &RunOutput) -> String {
    let mut s = CSV_COLUMNS.join(",");
    s.push('\n');
    for r in out.series.records() {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn rates_rows(res: &PointResult, n: usize, s: &mut String) {
    let target = 2.0 / (n as f64).powf(res.p);
    let healthy = res.output.healthy();
    for q in FITTED {
        match &res.rates[q.name()] {
            Ok(f) => writeln!(
                s,
                "{},{},{},{:e},{:e},{},{},{:e},{:e},{}",
                res.p,
                res.a,
                q.name(),
                f.lambda_hat,
                f.c_hat,
                f.window[0],
                f.window[1],
                f.residual,
                target,
                healthy
            ),
            Err(_) => writeln!(s, "{},{},{},NaN,NaN,NaN,NaN,NaN,{:e},{}", res.p, res.a, q.name(), target, healthy),
        }
        .unwrap();
    }
}

const RATES_HEADER: &str = "p,a,quantity,lambda_hat,c_hat,t1,t2,residual,target,healthy\n";

fn summary_json(cfg: &ExperimentConfig, res: &PointResult) -> serde_json::Value {
    let mut point = cfg.clone();
    point.p = res.p;
    point.a = res.a;
    let curvature = res.output.series.speed().curvature();
    let sc = curvature.exact_structure_constants();
    let rates: serde_json::Map<String, serde_json::Value> = res
        .rates
        .iter()
        .map(|(k, v)| {
            let val = match v {
                Ok(f) => serde_json::to_value(f).unwrap(),
                Err(e) => json!({ "error": e }),
            };
            (k.to_string(), val)
        })
        .collect();
    let health = &res.output.final_state.health;
    json!({
        "config": point,
        "derived": {
            "epsilon0": sc.epsilon0,
            "p0": sc.p0,
            "target_rate": 2.0 / (cfg.n as f64).powf(res.p),
        },
        "rates": rates,
        "health": {
            "completed": res.output.completed(),
            "convex": health.convex,
            "barrier_ok": health.barrier_ok,
            "abort": res.output.abort.as_ref().map(|e| e.to_string()),
            "t_final": res.output.final_state.t,
            "boundedness": res.boundedness,
        },
        "runtime_seconds": res.runtime_seconds,
    })
}

/// Runs one `(p, a)` point from `start` (or the configured initial data)
/// and writes its files into `dir`.
pub fn execute_point(
    cfg: &ExperimentConfig,
    p: f64,
    a: f64,
    start: Option<FlowState>,
    dir: &Path,
) -> Result<PointResult, CliError> {
    let clock = Instant::now();
    let fc = cfg.flow_config(p, a)?;
    fc.validate()?;
    let state = match start {
        Some(s) => s,
        None => FlowState::new(fc.initial.field(fc.mesh()?)?, 0.0),
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut outputs = 0usize;
    let mut io_failure = None;
    let output = resume(state, &fc, |s| {
        if cfg.checkpoint_every > 0 && outputs.is_multiple_of(cfg.checkpoint_every) && io_failure.is_none() {
            let path = dir.join(format!("checkpoint_{outputs:04}.snap"));
            if let Err(e) = fs::write(&path, write_snapshot(&s.field, s.t)) {
                io_failure = Some(CliError::Io { path, source: e });
            }
        }
        outputs += 1;
    })?;
    if let Some(e) = io_failure {
        return Err(e);
    }

    let records = output.series.records();
    let window = fc.window();
    let rates = FITTED
        .iter()
        .map(|&q| (q.name(), decay_rate_fit(records, q, window).map_err(|e| e.to_string())))
        .collect();
    let boundedness = boundedness_monitor(records, 1.0);
    let exit_code = point_exit_code(cfg.mode, &output);
    let mut res = PointResult {
        p,
        a,
        output,
        rates,
        boundedness,
        runtime_seconds: 0.0,
        exit_code,
        dir: dir.to_path_buf(),
    };
    res.runtime_seconds = clock.elapsed().as_secs_f64();

    write_file(&dir.join("diagnostics.csv"), &diagnostics_csv(&res.output))?;
    let final_state = &res.output.final_state;
    write_file(&dir.join("final.snap"), &write_snapshot(&final_state.field, final_state.t))?;
    let mut rates_csv = RATES_HEADER.to_string();
    rates_rows(&res, cfg.n, &mut rates_csv);
    write_file(&dir.join("rates.csv"), &rates_csv)?;
    let summary = serde_json::to_string_pretty(&summary_json(cfg, &res)).unwrap();
    write_file(&dir.join("summary.json"), &summary)?;
    Ok(res)
}

fn single_point(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.grid().len() != 1 {
        return Err(ConfigError::Validation(
            "sweep axes are set; use the sweep subcommand".into(),
        )
        .into());
    }
    Ok(())
}

/// `run <config>`
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<PointResult, CliError> {
    single_point(cfg)?;
    execute_point(cfg, cfg.p, cfg.a, None, &cfg.output)
}

/// `restart <snapshot> <config>`
pub fn restart(snapshot: &Path, cfg: &ExperimentConfig) -> Result<PointResult, CliError> {
    single_point(cfg)?;
    let text = fs::read_to_string(snapshot)
        .map_err(|e| CliError::Snapshot { path: snapshot.into(), source: CoreError::Snapshot { line: 0, msg: e.to_string() } })?;
    let (field, t) =
        read_snapshot(&text).map_err(|source| CliError::Snapshot { path: snapshot.into(), source })?;
    let mesh = field.mesh();
    if mesh.dim() != cfg.n || mesh.nodes() != cfg.nodes {
        return Err(ConfigError::Validation(format!(
            "snapshot has n = {}, N = {} but the config asks for n = {}, N = {}",
            mesh.dim(),
            mesh.nodes(),
            cfg.n,
            cfg.nodes
        ))
        .into());
    }
    if !(t < cfg.t_end) {
        return Err(ConfigError::Validation(format!("snapshot time {t} is not before T_end = {}", cfg.t_end)).into());
    }
    execute_point(cfg, cfg.p, cfg.a, Some(FlowState::new(field, t)), &cfg.output)
}

/// Worker count: `HYPERFLOW_WORKERS`, then the config, then the machine.
pub fn worker_count(cfg: &ExperimentConfig) -> Result<usize, CliError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(ConfigError::Validation(format!("{WORKERS_ENV}='{v}' is not a positive integer")).into()),
        };
    }
    Ok(cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

/// Directory name of a sweep point.
pub fn point_dir(root: &Path, p: f64, a: f64) -> PathBuf {
    root.join(format!("p={p}_a={a}"))
}

/// `sweep <config>`: every grid point in parallel, then the merged
/// `rates.csv` in the output root.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<PointResult>, CliError> {
    let workers = worker_count(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ConfigError::Validation(e.to_string()))?;
    fs::create_dir_all(&cfg.output).map_err(io_err(&cfg.output))?;
    let grid = cfg.grid();
    let results: Vec<Result<PointResult, CliError>> = pool.install(|| {
        grid.par_iter()
            .map(|&(p, a)| execute_point(cfg, p, a, None, &point_dir(&cfg.output, p, a)))
            .collect()
    });
    let results: Vec<PointResult> = results.into_iter().collect::<Result<_, _>>()?;
    let mut merged = RATES_HEADER.to_string();
    for r in &results {
        rates_rows(r, cfg.n, &mut merged);
    }
    write_file(&cfg.output.join("rates.csv"), &merged)?;
    Ok(results)
}

/// Combined exit code of a set of runs: the most severe one.
pub fn combined_exit_code(results: &[PointResult]) -> i32 {
    results.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK)
}
