use log::warn;
use rand::RngCore;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use super::config::RunConfig;
use crate::compiler::{trajectory_rng, SamplingStrategy, StepRecord, TrajectoryRunner};
use crate::error::{Error, Result};
use crate::hilbert::{moments, StateVector};
use crate::models::{initial_state, pauli_decompose, HamiltonianTermSet};
use crate::shadows::{estimate_term_moments, EstimatorConfig, ShadowSet};

pub const VERSION: &str = concat!("adaptive-drift ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Run,
    SweepSteps,
    SweepStepsize,
    TraceProbs,
    ShadowBench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::SweepSteps => "sweep-steps",
            Command::SweepStepsize => "sweep-stepsize",
            Command::TraceProbs => "trace-probs",
            Command::ShadowBench => "shadow-bench",
        }
    }
}

/// One row of a fidelity sweep (or the single row of `run`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    /// `N` for `run` and `sweep-steps`, the requested step size for `sweep-stepsize`.
    pub abscissa: f64,
    pub mean_fidelity: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub strategy: String,
    pub model_tag: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub tau: f64,
    pub sampled_index: usize,
    pub probabilities: Vec<f64>,
}

impl From<StepRecord> for TraceRow {
    fn from(r: StepRecord) -> Self {
        Self {
            step: r.step,
            tau: r.tau,
            sampled_index: r.sampled_index,
            probabilities: r.probabilities.as_slice().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowBenchRow {
    pub n_shots: usize,
    pub term: String,
    pub exact_deviation: f64,
    /// Estimate from the first repeat.
    pub deviation: f64,
    /// The same estimate after the noise floor, as the compiler would use it.
    pub floored_deviation: f64,
    pub mean_deviation: f64,
    pub deviation_std: f64,
    /// Spread over repeats of the estimated `⟨H⟩` and `⟨H²⟩ − ⟨H⟩²`.
    pub mean_std: f64,
    pub variance_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Table {
    Sweep(Vec<SweepRecord>),
    Trace(Vec<TraceRow>),
    ShadowBench(Vec<ShadowBenchRow>),
}

impl Table {
    pub fn len(&self) -> usize {
        match self {
            Table::Sweep(r) => r.len(),
            Table::Trace(r) => r.len(),
            Table::ShadowBench(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-point bookkeeping that does not fit the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointInfo {
    pub abscissa: f64,
    pub t: f64,
    pub n_steps: usize,
    pub point_seed: u64,
    pub max_tau: f64,
    pub clamped_variances: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_se: f64,
    pub slope_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotScaling {
    pub term: String,
    /// log–log slope of the repeat spread of `⟨H⟩` against `n_shots`.
    pub mean_slope: f64,
    /// Same for the variance estimate.
    pub variance_slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub version: String,
    pub command: Command,
    pub master_seed: u64,
    pub model_tag: String,
    pub strategy: String,
    pub term_labels: Vec<String>,
    pub points: Vec<PointInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<LinearFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_jitter: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub shot_scaling: Vec<ShotScaling>,
    pub warnings: Vec<String>,
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub table: Table,
    /// Step log of trajectory 0 when `record_traces` is set on `run`.
    pub trace: Option<Vec<TraceRow>>,
    pub metadata: Metadata,
}

impl ExperimentResult {
    pub fn sweep_records(&self) -> &[SweepRecord] {
        match &self.table {
            Table::Sweep(r) => r,
            _ => &[],
        }
    }

    pub fn trace_rows(&self) -> &[TraceRow] {
        match &self.table {
            Table::Trace(r) => r,
            _ => self.trace.as_deref().unwrap_or(&[]),
        }
    }

    pub fn shadow_rows(&self) -> &[ShadowBenchRow] {
        match &self.table {
            Table::ShadowBench(r) => r,
            _ => &[],
        }
    }
}

/// Seed of sweep point `point`. Trajectory `i` of that point then runs on
/// stream `i` of the point seed, so streams never collide within a point.
pub fn derive_seed(master_seed: u64, point: u64) -> u64 {
    trajectory_rng(master_seed, point).next_u64()
}

pub fn thread_pool(jobs: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Rejects runs whose `dim² · Σ N · n_samples` exceeds the budget.
pub fn check_budget(dim: usize, n_steps: &[usize], n_samples: usize, budget: f64) -> Result<()> {
    let steps: f64 = n_steps.iter().map(|&n| n as f64).sum();
    let work = (dim as f64).powi(2) * steps * n_samples as f64;
    if work > budget {
        return Err(Error::ResourceGuard { work, budget });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointStats {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub max_tau: f64,
    pub clamped_variances: usize,
}

/// Mean and standard error of the fidelity over `n_samples` trajectories.
/// Per-trajectory results are collected in index order and reduced
/// sequentially, so the output does not depend on the worker count.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_point(
    terms: &HamiltonianTermSet,
    psi0: &StateVector,
    strategy: &SamplingStrategy,
    t: f64,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
    pool: &ThreadPool,
) -> Result<PointStats> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let runner = TrajectoryRunner::new(terms, psi0, t, n_steps, strategy)?;
    let outcomes: Vec<(f64, f64, usize)> = pool.install(|| {
        (0..n_samples as u64)
            .into_par_iter()
            .map(|i| {
                runner
                    .run_seeded(seed, i, false)
                    .map(|r| (r.fidelity, r.max_tau, r.clamped_variances))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let n = outcomes.len() as f64;
    let mean = outcomes.iter().map(|o| o.0).sum::<f64>() / n;
    let std_error = if outcomes.len() > 1 {
        let ss: f64 = outcomes.iter().map(|o| (o.0 - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(PointStats {
        mean: mean.clamp(0.0, 1.0),
        std_error,
        n_samples: outcomes.len(),
        max_tau: outcomes.iter().map(|o| o.1).fold(0.0, f64::max),
        clamped_variances: outcomes.iter().map(|o| o.2).sum(),
    })
}

struct Prepared {
    terms: HamiltonianTermSet,
    psi0: StateVector,
}

fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let terms = config.model.build()?;
    let psi0 = initial_state(&config.model)?;
    Ok(Prepared { terms, psi0 })
}

fn metadata(config: &RunConfig, command: Command, terms: &HamiltonianTermSet) -> Metadata {
    Metadata {
        version: VERSION.to_string(),
        command,
        master_seed: config.master_seed,
        model_tag: config.model.tag().to_string(),
        strategy: config.strategy.tag().to_string(),
        term_labels: terms.labels().iter().map(|s| s.to_string()).collect(),
        points: Vec::new(),
        fit: None,
        trace_jitter: None,
        shot_scaling: Vec::new(),
        warnings: Vec::new(),
        config: config.clone(),
    }
}

/// Evaluates `(abscissa, t, N)` points in order.
fn run_points(
    config: &RunConfig,
    command: Command,
    points: Vec<(f64, f64, usize)>,
    jobs: usize,
) -> Result<ExperimentResult> {
    let Prepared { terms, psi0 } = prepare(config)?;
    let steps: Vec<usize> = points.iter().map(|p| p.2).collect();
    check_budget(psi0.space().dim(), &steps, config.n_samples, config.resource_budget)?;
    let pool = thread_pool(jobs)?;
    let mut meta = metadata(config, command, &terms);
    if config.n_samples == 1 {
        let msg = "n_samples = 1: standard error reported as 0".to_string();
        warn!("{msg}");
        meta.warnings.push(msg);
    }
    let mut records = Vec::with_capacity(points.len());
    for (k, &(abscissa, t, n_steps)) in points.iter().enumerate() {
        let seed = derive_seed(config.master_seed, k as u64);
        let stats = monte_carlo_point(&terms, &psi0, &config.strategy, t, n_steps, config.n_samples, seed, &pool)?;
        records.push(SweepRecord {
            abscissa,
            mean_fidelity: stats.mean,
            std_error: stats.std_error,
            n_samples: stats.n_samples,
            strategy: config.strategy.tag().to_string(),
            model_tag: config.model.tag().to_string(),
            seed: config.master_seed,
        });
        meta.points.push(PointInfo {
            abscissa,
            t,
            n_steps,
            point_seed: seed,
            max_tau: stats.max_tau,
            clamped_variances: stats.clamped_variances,
        });
    }
    let trace = if command == Command::Run && config.record_traces {
        let (_, t, n_steps) = points[0];
        let runner = TrajectoryRunner::new(&terms, &psi0, t, n_steps, &config.strategy)?;
        let log = runner.run_seeded(meta.points[0].point_seed, 0, true)?.step_log.unwrap_or_default();
        Some(log.into_iter().map(TraceRow::from).collect())
    } else {
        None
    };
    Ok(ExperimentResult {
        table: Table::Sweep(records),
        trace,
        metadata: meta,
    })
}

/// Single point at the configured `t` and `N`.
pub fn monte_carlo_fidelity(config: &RunConfig, jobs: usize) -> Result<ExperimentResult> {
    run_points(config, Command::Run, vec![(config.n_steps as f64, config.t, config.n_steps)], jobs)
}

fn sorted_unique<T: PartialOrd + Copy + std::fmt::Debug>(values: &[T], what: &str) -> Result<Vec<T>> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("{what} contains duplicates: {values:?}")));
    }
    Ok(v)
}

/// Fixed step size `t/N = step_size`, varying `N`; one row per `N`.
pub fn sweep_steps(config: &RunConfig, jobs: usize) -> Result<ExperimentResult> {
    let points = sorted_unique(&config.n_steps_list, "n_steps_list")?
        .into_iter()
        .map(|n| (n as f64, config.step_size * n as f64, n))
        .collect();
    run_points(config, Command::SweepSteps, points, jobs)
}

/// Fixed `t`, `N = round(t / step)`; one row per step size, plus the
/// zero-step fit in the metadata.
pub fn sweep_stepsize(config: &RunConfig, jobs: usize) -> Result<ExperimentResult> {
    let mut points = Vec::new();
    for step in sorted_unique(&config.step_sizes, "step_sizes")? {
        let n = (config.t / step).round();
        if n < 1.0 {
            return Err(Error::Config(format!("step size {step} exceeds t = {}", config.t)));
        }
        points.push((step, config.t, n as usize));
    }
    let mut result = run_points(config, Command::SweepStepsize, points, jobs)?;
    for p in &result.metadata.points {
        let actual = p.t / p.n_steps as f64;
        if (actual - p.abscissa).abs() > 1e-9 * p.abscissa {
            result
                .metadata
                .warnings
                .push(format!("step {} realized as t/N = {actual} with N = {}", p.abscissa, p.n_steps));
        }
    }
    if result.sweep_records().len() >= 2 {
        // fit against the realized step t/N rather than the requested one
        let data: Vec<(f64, f64)> = result
            .sweep_records()
            .iter()
            .zip(&result.metadata.points)
            .map(|(r, p)| (p.t / p.n_steps as f64, r.mean_fidelity))
            .collect();
        result.metadata.fit = Some(extrapolate_zero_step(&data)?);
    }
    Ok(result)
}

/// Ordinary least squares `y = a + b x`; standard errors from the residuals
/// (zero when only two points are given).
pub fn extrapolate_zero_step(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::InvalidFit(format!("need at least 2 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(Error::InvalidFit("all abscissae are identical".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let s2 = if points.len() > 2 {
        points
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum::<f64>()
            / (n - 2.0)
    } else {
        0.0
    };
    Ok(LinearFit {
        intercept,
        slope,
        intercept_se: (s2 * (1.0 / n + mx * mx / sxx)).sqrt(),
        slope_se: (s2 / sxx).sqrt(),
    })
}

/// Mean absolute change of the probability vector between consecutive steps.
pub fn trace_jitter(rows: &[TraceRow]) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let total: f64 = rows
        .windows(2)
        .map(|w| {
            w[0].probabilities
                .iter()
                .zip(&w[1].probabilities)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
        })
        .sum();
    total / (rows.len() - 1) as f64
}

/// Step-by-step sampling probabilities of one seeded adaptive trajectory.
pub fn trace_probabilities(config: &RunConfig) -> Result<ExperimentResult> {
    if !config.strategy.is_adaptive() {
        return Err(Error::Config(format!(
            "probability traces need an adaptive strategy; under {:?} they are constant",
            config.strategy.tag()
        )));
    }
    let Prepared { terms, psi0 } = prepare(config)?;
    check_budget(psi0.space().dim(), &[config.n_steps], 1, config.resource_budget)?;
    let seed = derive_seed(config.master_seed, 0);
    let runner = TrajectoryRunner::new(&terms, &psi0, config.t, config.n_steps, &config.strategy)?;
    let result = runner.run_seeded(seed, 0, true)?;
    let rows: Vec<TraceRow> = result
        .step_log
        .unwrap_or_default()
        .into_iter()
        .map(TraceRow::from)
        .collect();
    let mut meta = metadata(config, Command::TraceProbs, &terms);
    meta.points.push(PointInfo {
        abscissa: config.n_steps as f64,
        t: config.t,
        n_steps: config.n_steps,
        point_seed: seed,
        max_tau: result.max_tau,
        clamped_variances: result.clamped_variances,
    });
    meta.trace_jitter = Some(trace_jitter(&rows));
    Ok(ExperimentResult {
        table: Table::Trace(rows),
        trace: None,
        metadata: meta,
    })
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Estimator calibration on the initial state: repeated shadow estimates of
/// every term at each configured shot count, against exact moments.
pub fn shadow_bench(config: &RunConfig, jobs: usize) -> Result<ExperimentResult> {
    let Prepared { terms, psi0 } = prepare(config)?;
    let bench = &config.shadow_bench;
    let n_qubits = psi0.space().factors().len();
    let shots: usize = bench.n_shots.iter().sum();
    let work = (shots * bench.repeats) as f64 * (psi0.space().dim() * n_qubits) as f64;
    if work > config.resource_budget {
        return Err(Error::ResourceGuard {
            work,
            budget: config.resource_budget,
        });
    }
    let paulis = terms
        .terms()
        .iter()
        .map(|t| pauli_decompose(&t.operator))
        .collect::<Result<Vec<_>>>()?;
    let exact: Vec<f64> = terms
        .terms()
        .iter()
        .map(|t| moments(&t.operator, &psi0).map(|m| m.variance.max(0.0).sqrt()))
        .collect::<Result<_>>()?;
    let pool = thread_pool(jobs)?;
    let shot_list = sorted_unique(&bench.n_shots, "shadow_bench.n_shots")?;
    let mut rows = Vec::new();
    let mut meta = metadata(config, Command::ShadowBench, &terms);
    for (k, &n_shots) in shot_list.iter().enumerate() {
        let seed = derive_seed(config.master_seed, k as u64);
        let est = EstimatorConfig::new(n_shots, bench.mom_batches);
        est.validate()?;
        // [repeat][term] -> (mean, variance, noise floor)
        let runs: Vec<Vec<(f64, f64, f64)>> = pool.install(|| {
            (0..bench.repeats as u64)
                .into_par_iter()
                .map(|r| {
                    let mut rng = trajectory_rng(seed, r);
                    let shadow = ShadowSet::collect(&psi0, n_shots, &mut rng, seed)?;
                    paulis
                        .iter()
                        .map(|p| estimate_term_moments(&shadow, p, &est).map(|m| (m.mean, m.variance, m.noise_floor)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (j, label) in terms.labels().iter().enumerate() {
            let means: Vec<f64> = runs.iter().map(|r| r[j].0).collect();
            let vars: Vec<f64> = runs.iter().map(|r| r[j].1).collect();
            let devs: Vec<f64> = vars.iter().map(|v| v.max(0.0).sqrt()).collect();
            rows.push(ShadowBenchRow {
                n_shots,
                term: label.to_string(),
                exact_deviation: exact[j],
                deviation: devs[0],
                floored_deviation: if devs[0] >= runs[0][j].2 { devs[0] } else { 0.0 },
                mean_deviation: devs.iter().sum::<f64>() / devs.len() as f64,
                deviation_std: sample_std(&devs),
                mean_std: sample_std(&means),
                variance_std: sample_std(&vars),
            });
        }
        meta.points.push(PointInfo {
            abscissa: n_shots as f64,
            t: 0.0,
            n_steps: 0,
            point_seed: seed,
            max_tau: 0.0,
            clamped_variances: 0,
        });
    }
    if shot_list.len() >= 2 {
        for label in terms.labels() {
            let slope = |f: fn(&ShadowBenchRow) -> f64| -> Result<f64> {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.term == label)
                    .map(|r| ((r.n_shots as f64).ln(), f(r).ln()))
                    .collect();
                Ok(extrapolate_zero_step(&pts)?.slope)
            };
            meta.shot_scaling.push(ShotScaling {
                term: label.to_string(),
                mean_slope: slope(|r| r.mean_std)?,
                variance_slope: slope(|r| r.variance_std)?,
            });
        }
    }
    Ok(ExperimentResult {
        table: Table::ShadowBench(rows),
        trace: None,
        metadata: meta,
    })
}

pub fn run_command(command: Command, config: &RunConfig, jobs: usize) -> Result<ExperimentResult> {
    match command {
        Command::Run => monte_carlo_fidelity(config, jobs),
        Command::SweepSteps => sweep_steps(config, jobs),
        Command::SweepStepsize => sweep_stepsize(config, jobs),
        Command::TraceProbs => trace_probabilities(config),
        Command::ShadowBench => shadow_bench(config, jobs),
    }
}
