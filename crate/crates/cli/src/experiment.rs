//! Replicated experiment execution and aggregation.
//!
//! Each (solver, replicate) pair runs independently — replicate `i` uses
//! RNG stream id `i` under the shared base seed — and writes one trace
//! CSV. Aggregation then re-reads those files, so the summary is a pure
//! function of the on-disk artifacts and a parse/re-aggregate round trip
//! reproduces it byte for byte. Worker parallelism (capped by
//! `SSD_THREADS`) never affects any output byte.

use crate::config::{ExperimentPlan, SolverSpec, X0Spec};
use crate::{thread_cap, CliError, CliResult};
use rayon::prelude::*;
use serde::Serialize;
use ssd_core::{
    gradient_descent, relative_error, run, DenseVector, ObjectiveOracle, OptimizerConfig,
    RngStream, SamplerScheme,
};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

/// Stable trace schema; one row per iteration record.
pub const TRACE_COLUMNS: [&str; 10] = [
    "run_id",
    "iteration",
    "fevals",
    "f_value",
    "rel_error",
    "step_size",
    "scheme",
    "ell",
    "seed",
    "stream_id",
];

/// Seed offset separating starting-point draws from sampler draws.
const X0_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn trace_filename(solver_id: &str, replicate: usize) -> String {
    format!("trace_{solver_id}_r{replicate:04}.csv")
}

fn scheme_label(solver: &SolverSpec) -> String {
    match solver.scheme {
        Some(s) => s.to_string(),
        None => "gd".into(),
    }
}

fn starting_point(plan: &ExperimentPlan, replicate: usize) -> DenseVector {
    let dim = plan.benchmark.dim();
    match &plan.config.x0 {
        X0Spec::Named(name) if name == "ones" => DenseVector::from_vec(vec![1.0; dim]),
        X0Spec::Named(_) => DenseVector::zeros(dim),
        X0Spec::Explicit(v) => DenseVector::from_vec(v.clone()),
        X0Spec::Gaussian { gaussian } => {
            let mut rng = RngStream::new(plan.config.base_seed ^ X0_SEED_SALT, replicate as u64);
            let mut x = ssd_core::gaussian_vector(&mut rng, dim);
            x.scale(*gaussian);
            x
        }
    }
}

fn run_one(plan: &ExperimentPlan, solver: &SolverSpec, replicate: usize) -> CliResult<()> {
    let oracle = ObjectiveOracle::new(plan.benchmark.clone(), plan.backend);
    let mut config = OptimizerConfig::new(
        solver.ell,
        solver.scheme.unwrap_or(SamplerScheme::Haar),
        solver.step,
    );
    config.max_iterations = plan.config.max_iterations;
    config.max_fevals = plan.config.max_fevals;
    config.target_f = plan.config.target_f;
    config.target_relative_error = plan.config.target_relative_error;
    config.seed = plan.config.base_seed;
    config.stream_id = replicate as u64;

    let x0 = starting_point(plan, replicate);
    let trace = match solver.scheme {
        Some(_) => run(&config, &oracle, &x0)?,
        None => gradient_descent(&config, &oracle, &x0)?,
    };

    let path = plan.output_dir.join(trace_filename(&solver.id, replicate));
    let mut writer = csv::Writer::from_path(&path)?;
    writer.write_record(TRACE_COLUMNS)?;
    let f_star = plan.benchmark.f_star();
    let scheme = scheme_label(solver);
    for rec in &trace.records {
        let rel = match f_star {
            Some(fs) => relative_error(rec.f_value, fs),
            None => f64::NAN,
        };
        writer.write_record([
            replicate.to_string(),
            rec.iteration.to_string(),
            rec.fevals.to_string(),
            format!("{}", rec.f_value),
            format!("{rel}"),
            format!("{}", rec.step_size),
            scheme.clone(),
            solver.ell.to_string(),
            plan.config.base_seed.to_string(),
            replicate.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(())
}

/// Runs every (solver, replicate) job and writes the trace files.
pub fn execute(plan: &ExperimentPlan) -> CliResult<()> {
    std::fs::create_dir_all(&plan.output_dir)?;
    let jobs: Vec<(usize, usize)> = (0..plan.solvers.len())
        .flat_map(|s| (0..plan.config.replicates).map(move |r| (s, r)))
        .collect();

    let worker = |&(s, r): &(usize, usize)| run_one(plan, &plan.solvers[s], r);
    match thread_cap()? {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Input(format!("cannot build worker pool: {e}")))?;
            pool.install(|| jobs.par_iter().map(worker).collect::<CliResult<Vec<()>>>())?;
        }
        None => {
            jobs.par_iter().map(worker).collect::<CliResult<Vec<()>>>()?;
        }
    }
    Ok(())
}

struct TraceRow {
    fevals: u64,
    rel_error: f64,
}

fn parse_trace(path: &Path) -> CliResult<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Input(format!("missing trace {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let fevals: u64 = record
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Input(format!("bad fevals field in {}", path.display())))?;
        let rel_error: f64 = record
            .get(4)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Input(format!("bad rel_error field in {}", path.display())))?;
        rows.push(TraceRow { fevals, rel_error });
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!(
            "trace {} contains no records",
            path.display()
        )));
    }
    Ok(rows)
}

/// Last-observation-carried-forward values on an ascending feval grid;
/// grid points before the first observation back-fill from it.
fn locf(rows: &[TraceRow], grid: &[u64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut i = 0usize;
    for &g in grid {
        while i < rows.len() && rows[i].fevals <= g {
            i += 1;
        }
        let v = if i == 0 {
            rows[0].rel_error
        } else {
            rows[i - 1].rel_error
        };
        out.push(v);
    }
    out
}

/// Nearest-rank percentile: the value at rank `ceil(p/100 * n)` of the
/// ascending sample.
fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len() as f64;
    let rank = (p / 100.0 * n).ceil().max(1.0) as usize;
    sorted[rank - 1]
}

/// Evaluations to cut the initial relative error by `threshold`
/// (e.g. 0.95 keeps the first row whose error is within 5% of the start).
fn fevals_to_threshold(rows: &[TraceRow], threshold: f64) -> Option<u64> {
    let cutoff = rows[0].rel_error * (1.0 - threshold);
    rows.iter().find(|r| r.rel_error <= cutoff).map(|r| r.fevals)
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkMeta {
    pub name: String,
    pub dim: usize,
    pub f_star: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub solver: String,
    pub scheme: String,
    pub ell: usize,
    pub policy: String,
    pub trials: usize,
    pub converged: usize,
    /// Median evaluations to the profile threshold; absent when half or
    /// more of the replicates never reached it.
    pub median_fevals_to_threshold: Option<f64>,
    pub feval_grid: Vec<u64>,
    pub p10: Vec<f64>,
    pub p50: Vec<f64>,
    pub p90: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub benchmark: BenchmarkMeta,
    pub backend: String,
    pub replicates: usize,
    pub base_seed: u64,
    pub max_iterations: usize,
    pub max_fevals: u64,
    pub profile_threshold: f64,
    pub solvers: Vec<SolverSummary>,
}

/// Builds the summary by parsing the trace files back in. Percentile
/// curves use the nearest-rank estimator on a per-solver grid made of
/// every observed feval count.
pub fn aggregate(plan: &ExperimentPlan) -> CliResult<Summary> {
    let mut solvers = Vec::with_capacity(plan.solvers.len());
    for solver in &plan.solvers {
        let mut traces = Vec::with_capacity(plan.config.replicates);
        for rep in 0..plan.config.replicates {
            traces.push(parse_trace(
                &plan.output_dir.join(trace_filename(&solver.id, rep)),
            )?);
        }

        let grid: Vec<u64> = traces
            .iter()
            .flat_map(|t| t.iter().map(|r| r.fevals))
            .collect::<BTreeSet<u64>>()
            .into_iter()
            .collect();
        let curves: Vec<Vec<f64>> = traces.iter().map(|t| locf(t, &grid)).collect();

        let mut p10 = Vec::with_capacity(grid.len());
        let mut p50 = Vec::with_capacity(grid.len());
        let mut p90 = Vec::with_capacity(grid.len());
        let mut column = vec![0.0f64; curves.len()];
        for gi in 0..grid.len() {
            for (ci, curve) in curves.iter().enumerate() {
                column[ci] = curve[gi];
            }
            column.sort_by(f64::total_cmp);
            p10.push(nearest_rank(&column, 10.0));
            p50.push(nearest_rank(&column, 50.0));
            p90.push(nearest_rank(&column, 90.0));
        }

        let mut to_threshold: Vec<f64> = traces
            .iter()
            .map(|t| {
                fevals_to_threshold(t, plan.config.profile_threshold)
                    .map(|m| m as f64)
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        let converged = to_threshold.iter().filter(|m| m.is_finite()).count();
        to_threshold.sort_by(f64::total_cmp);
        let median = nearest_rank(&to_threshold, 50.0);

        solvers.push(SolverSummary {
            solver: solver.id.clone(),
            scheme: scheme_label(solver),
            ell: solver.ell,
            policy: solver.policy_kind.to_string(),
            trials: plan.config.replicates,
            converged,
            median_fevals_to_threshold: median.is_finite().then_some(median),
            feval_grid: grid,
            p10,
            p50,
            p90,
        });
    }

    Ok(Summary {
        benchmark: BenchmarkMeta {
            name: plan.benchmark.name().to_string(),
            dim: plan.benchmark.dim(),
            f_star: plan.benchmark.f_star(),
            gamma: plan.benchmark.gamma(),
            lambda: plan.benchmark.lambda(),
        },
        backend: plan.config.backend.label(),
        replicates: plan.config.replicates,
        base_seed: plan.config.base_seed,
        max_iterations: plan.config.max_iterations,
        max_fevals: plan.config.max_fevals,
        profile_threshold: plan.config.profile_threshold,
        solvers,
    })
}

pub fn summary_bytes(summary: &Summary) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(summary)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// `run` subcommand: execute the grid, aggregate, write `summary.json`.
pub fn run_experiment(config_path: &Path) -> CliResult<PathBuf> {
    let plan = crate::config::load_config(config_path)?;
    execute(&plan)?;
    let summary = aggregate(&plan)?;
    let path = plan.output_dir.join("summary.json");
    std::fs::write(&path, summary_bytes(&summary)?)?;
    Ok(path)
}

/// Re-runs only the aggregation against existing trace files; used to
/// verify that a write/parse/re-aggregate round trip is lossless.
pub fn aggregate_only(config_path: &Path) -> CliResult<Vec<u8>> {
    let plan = crate::config::load_config(config_path)?;
    summary_bytes(&aggregate(&plan)?)
}
