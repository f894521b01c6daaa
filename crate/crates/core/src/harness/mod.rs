//! Seeded Monte-Carlo experiments, sweeps and result emission.

mod config;
mod emit;
mod experiment;

pub use config::{Format, OutputConfig, RunConfig, ShadowBenchConfig};
pub use emit::{attached_trace_grid, emit, main_grid, metadata_path, render_csv, render_json, trace_path, Cell, Grid};
pub use experiment::{
    check_budget, derive_seed, extrapolate_zero_step, monte_carlo_fidelity, monte_carlo_point, run_command,
    shadow_bench, sweep_stepsize, sweep_steps, thread_pool, trace_jitter, trace_probabilities, Command,
    ExperimentResult, LinearFit, Metadata, PointInfo, PointStats, ShadowBenchRow, ShotScaling, SweepRecord, Table,
    TraceRow, VERSION,
};
