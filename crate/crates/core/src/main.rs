use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use traitpop::cli::{run_experiment, CliError};
use traitpop::config::{ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "traitpop",
    about = "Trait-structured population simulator: individual-based runs, the deterministic population limit, stationary profiles, and ancestral-lineage samplers"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// master seed; overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// worker threads for replicate-level parallelism
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the individual-based simulation
    Simulate {
        /// final time override
        #[arg(long = "T")]
        horizon: Option<f64>,
        /// competition mode override: nonlinear or frozen
        #[arg(long)]
        mode: Option<CliMode>,
    },
    /// Solve the stationary eigenproblem
    Stationary,
    /// Sample spinal or reversed-process paths
    Spine {
        /// sampling direction override: forward or reversed
        #[arg(long)]
        direction: Option<CliDirection>,
        /// path count override
        #[arg(long)]
        n_paths: Option<usize>,
        /// final time override
        #[arg(long = "T")]
        horizon: Option<f64>,
    },
    /// End-to-end lineage comparison against the reversed process
    Validate,
    /// Generator and semigroup duality diagnostics
    Duality,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CliMode {
    Nonlinear,
    Frozen,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CliDirection {
    Forward,
    Reversed,
}

fn kind_matches(cmd: Command, kind: &ExperimentKind) -> bool {
    matches!(
        (cmd, kind),
        (Command::Simulate { .. }, ExperimentKind::Simulate { .. })
            | (Command::Stationary, ExperimentKind::Stationary { .. })
            | (Command::Spine { .. }, ExperimentKind::Spine { .. })
            | (Command::Validate, ExperimentKind::Validate { .. })
            | (Command::Duality, ExperimentKind::Duality { .. })
    )
}

fn apply_overrides(cmd: Command, kind: &mut ExperimentKind) {
    match (cmd, kind) {
        (
            Command::Simulate {
                horizon: h,
                mode: m,
            },
            ExperimentKind::Simulate { horizon, mode, .. },
        ) => {
            if let Some(h) = h {
                *horizon = h;
            }
            if let Some(m) = m {
                *mode = match m {
                    CliMode::Nonlinear => traitpop::config::ModeConfig::Nonlinear,
                    CliMode::Frozen => traitpop::config::ModeConfig::Frozen,
                };
            }
        }
        (
            Command::Spine {
                direction: d,
                n_paths: n,
                horizon: h,
            },
            ExperimentKind::Spine {
                direction,
                n_paths,
                horizon,
                ..
            },
        ) => {
            if let Some(d) = d {
                *direction = match d {
                    CliDirection::Forward => traitpop::config::SpineDirection::Forward,
                    CliDirection::Reversed => traitpop::config::SpineDirection::Reversed,
                };
            }
            if let Some(n) = n {
                *n_paths = n;
            }
            if let Some(h) = h {
                *horizon = h;
            }
        }
        _ => {}
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    if let Some(jobs) = args.jobs {
        // a later init (e.g. in tests) is fine to ignore
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let config_path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let (mut config, base_dir) = ExperimentConfig::from_path(config_path)?;
    if !kind_matches(args.command, &config.experiment) {
        return Err(CliError::Config(
            "config experiment kind does not match the subcommand".into(),
        ));
    }
    apply_overrides(args.command, &mut config.experiment);
    let outcome = run_experiment(&config, &base_dir, args.seed, &args.out)?;
    for file in &outcome.manifest.files {
        println!("wrote {} ({} bytes)", file.name, file.bytes);
    }
    if let Some(failure) = outcome.statistical_failure {
        return Err(CliError::Statistical(failure));
    }
    println!("ok: {} (seed {})", outcome.manifest.experiment, outcome.manifest.seed);
    Ok(())
}
