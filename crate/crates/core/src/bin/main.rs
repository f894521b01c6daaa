use std::path::PathBuf;
use std::process::ExitCode;

use adaptive_drift::harness::{self, Command, Format, RunConfig};
use adaptive_drift::Error;
use clap::{Args, Parser, Subcommand};
use log::info;

#[derive(Parser)]
#[command(name = "adaptive-drift", version, about = "Fluctuation-guided randomized Hamiltonian simulation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte-Carlo fidelity at a single (t, N) point
    Run(Common),
    /// Fidelity against N at fixed step size
    SweepSteps(Common),
    /// Fidelity against step size at fixed t, with zero-step extrapolation
    SweepStepsize(Common),
    /// Per-step sampling probabilities of one adaptive trajectory
    TraceProbs(Common),
    /// Shadow estimator calibration against exact term deviations
    ShadowBench(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides master_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides output.path; stdout when neither is given
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json; overrides output.format
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

impl Cmd {
    fn split(self) -> (Command, Common) {
        match self {
            Cmd::Run(c) => (Command::Run, c),
            Cmd::SweepSteps(c) => (Command::SweepSteps, c),
            Cmd::SweepStepsize(c) => (Command::SweepStepsize, c),
            Cmd::TraceProbs(c) => (Command::TraceProbs, c),
            Cmd::ShadowBench(c) => (Command::ShadowBench, c),
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ResourceGuard { .. } => 3,
        Error::Io { .. } | Error::Json(_) | Error::MalformedRecord(_) => 1,
        _ => 2,
    }
}

fn execute(command: Command, args: Common) -> Result<(), Error> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(out) = args.out {
        config.output.path = Some(out);
    }
    if let Some(format) = args.format {
        config.output.format = format;
    }
    info!("{} on {} with {}", command.name(), config.model.tag(), config.strategy.tag());
    let result = harness::run_command(command, &config, args.jobs)?;
    match &config.output.path {
        Some(path) => {
            for p in harness::emit(&result, config.output.format, path)? {
                info!("wrote {}", p.display());
            }
        }
        None => {
            use std::io::Write;
            let bytes = match config.output.format {
                Format::Json => harness::render_json(&result)?,
                Format::Csv => harness::render_csv(&harness::main_grid(&result))?,
            };
            std::io::stdout().write_all(&bytes).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
