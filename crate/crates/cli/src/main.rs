use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridformer::tensor::{set_backward_fault, Primitive};
use gridformer_cli::{
    cmd_eval, cmd_gen_data, cmd_gradcheck, cmd_reconstruct, cmd_train, CliError, CliResult, ExperimentConfig,
    DATASET_FILE, FINAL_CHECKPOINT, MESH_FILE,
};

/// Surface reconstruction runs: gen-data, train, reconstruct, eval.
///
/// Run commands share `--config`, `--seed` and the ablation flags; pass the
/// same ones to every command of a run so `OUT/config.toml` stays accurate.
#[derive(Parser)]
#[command(name = "gridformer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML). Defaults apply to omitted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the boundary stage (sets train.stage2_steps = 0).
    #[arg(long)]
    no_boundary_opt: bool,
    /// Keep every U-Net level at the base resolution.
    #[arg(long)]
    no_downsampling: bool,
    /// Sample the full final lattice when meshing.
    #[arg(long)]
    dense: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a noisy point cloud and labelled queries.
    GenData {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Stage-1 training, then boundary finetuning.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Dataset to train on [default: OUT/dataset.gfds].
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Extract a mesh from a trained model.
    Reconstruct {
        #[command(flatten)]
        run: RunArgs,
        /// [default: OUT/checkpoint-final.gfck]
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// [default: OUT/dataset.gfds]
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Score a mesh against the configured shape.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// [default: OUT/mesh.obj]
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Finite-difference check of every primitive and of the training loss.
    Gradcheck {
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturbs one primitive's backward pass.
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

fn load(run: &RunArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = match &run.config {
        Some(p) => ExperimentConfig::read(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = run.seed {
        cfg.set_seed(s);
    }
    if run.no_boundary_opt {
        cfg.train.stage2_steps = 0;
    }
    if run.no_downsampling {
        cfg.model.enable_downsampling = false;
    }
    if run.dense {
        cfg.meshing.dense = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn or_in(dir: &Path, given: Option<PathBuf>, name: &str) -> PathBuf {
    given.unwrap_or_else(|| dir.join(name))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenData { run } => {
            cmd_gen_data(&load(&run)?, &run.out)?;
        }
        Command::Train { run, dataset } => {
            cmd_train(&load(&run)?, &or_in(&run.out, dataset, DATASET_FILE), &run.out)?;
        }
        Command::Reconstruct {
            run,
            checkpoint,
            dataset,
        } => {
            let cfg = load(&run)?;
            cmd_reconstruct(
                &cfg,
                &or_in(&run.out, checkpoint, FINAL_CHECKPOINT),
                &or_in(&run.out, dataset, DATASET_FILE),
                &run.out,
            )?;
        }
        Command::Eval { run, mesh } => {
            let cfg = load(&run)?;
            cmd_eval(&cfg, &or_in(&run.out, mesh, MESH_FILE), &run.out)?;
        }
        Command::Gradcheck {
            trials,
            seed,
            inject_fault,
        } => {
            if let Some(name) = inject_fault {
                let p = Primitive::from_name(&name)
                    .ok_or_else(|| CliError::Config(format!("unknown primitive {name:?}")))?;
                set_backward_fault(Some(p));
            }
            cmd_gradcheck(trials, seed)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
