//! Reproducible experiment runs: data generation, two-stage training,
//! mesh extraction and evaluation, each writing into a run directory.
//!
//! Every command resolves its flags into an [`ExperimentConfig`] and writes
//! it to `config.toml` in the run directory, so the directory records the
//! exact settings that produced its files.

pub mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use gridformer::fields::{extract_boundary, Dataset};
use gridformer::meshing::{dense_extract, mise_extract, read_obj, write_obj, Mesh, MiseOutput};
use gridformer::metrics::{evaluate_reconstruction, MetricsReport};
use gridformer::model::{decode, encode, occupancy_probability, Checkpoint, ModelParams};
use gridformer::tensor::{primitive_suite, Primitive};
use gridformer::training::{micro_loss_gradcheck, train_stage1, train_stage2, LossTrace, Stage, Trainer};
use gridformer::Error;

pub use config::{DataConfig, ExperimentConfig, MeshingConfig, ShapeConfig};

pub const CONFIG_FILE: &str = "config.toml";
pub const DATASET_FILE: &str = "dataset.gfds";
pub const STAGE1_CHECKPOINT: &str = "checkpoint-stage1.gfck";
pub const FINAL_CHECKPOINT: &str = "checkpoint-final.gfck";
pub const LOSS_TRACE: &str = "loss.tsv";
pub const MESH_FILE: &str = "mesh.obj";
pub const METRICS_FILE: &str = "metrics.txt";

/// Per-primitive tolerance of the gradient suite.
pub const PRIMITIVE_TOLERANCE: f64 = 1e-6;
/// Tolerance of the end-to-end loss check.
pub const LOSS_TOLERANCE: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error("gradient check failed: {0}")]
    Gradcheck(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::Io(_) | Error::Format(_) => 2,
                Error::NonFinite { .. } => 3,
                Error::EmptyBoundary => 4,
                Error::EmptyMesh => 5,
                _ => 1,
            },
            CliError::Gradcheck(_) => 6,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Worker count for decoding, from `GRIDFORMER_THREADS` (default 1).
pub fn thread_count() -> CliResult<usize> {
    match std::env::var("GRIDFORMER_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!(
                "GRIDFORMER_THREADS must be a positive integer, got {s:?}"
            ))),
        },
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes `config.toml` into `dir`.
pub fn write_config(cfg: &ExperimentConfig, dir: &Path) -> CliResult<()> {
    create_dir(dir)?;
    let path = dir.join(CONFIG_FILE);
    std::fs::write(&path, cfg.to_toml()).map_err(|e| CliError::io(&path, e))
}

/// Attaches the path to core IO failures.
fn at(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Io(source) => CliError::io(path, source),
        other => CliError::Core(other),
    }
}

pub fn cmd_gen_data(cfg: &ExperimentConfig, out: &Path) -> CliResult<Dataset> {
    write_config(cfg, out)?;
    let d = &cfg.data;
    let ds = Dataset::generate(
        &cfg.shape.to_spec(),
        d.n_points,
        d.sigma,
        d.n_queries,
        cfg.train.boundary_radius,
        d.seed,
    )?;
    let path = out.join(DATASET_FILE);
    ds.write(&path).map_err(at(&path))?;
    let boundary = ds.queries.boundary_mask.iter().filter(|&&b| b).count();
    let inside = ds.queries.labels.iter().filter(|&&b| b).count();
    println!(
        "points {} queries {} inside {} boundary {}",
        ds.points.len(),
        ds.queries.len(),
        inside,
        boundary
    );
    Ok(ds)
}

/// Summary of a training run.
#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub stage1_steps: usize,
    pub stage2_steps: usize,
    pub trace: LossTrace,
}

fn write_checkpoint(trainer: &Trainer, path: &Path) -> CliResult<()> {
    let ck = Checkpoint {
        params: trainer.params.clone(),
        extra: trainer.state.to_named(&trainer.params),
    };
    ck.write(path).map_err(at(path))
}

/// Stage 1, then stage 2 on boundary queries unless `train.stage2_steps`
/// is 0, in which case the final checkpoint is the stage-1 checkpoint.
pub fn cmd_train(cfg: &ExperimentConfig, dataset: &Path, out: &Path) -> CliResult<TrainSummary> {
    write_config(cfg, out)?;
    let mut ds = Dataset::read(dataset).map_err(at(dataset))?;
    let params = ModelParams::init(&cfg.model, cfg.train.seed)?;
    let stage2 = cfg.train.stage2_steps > 0;
    if stage2 {
        let found = extract_boundary(&ds.queries, cfg.train.boundary_radius)?;
        log::info!(
            "{} boundary queries within radius {}",
            found.count,
            cfg.train.boundary_radius
        );
        ds.queries = found.queries;
    }
    let mut trainer = Trainer::new(params, ds, cfg.train.clone())?;
    trainer.progress = Some(Box::new(|stage: Stage, step: usize, loss: f64| {
        if step.is_multiple_of(50) {
            log::info!("stage {} step {step} loss {loss:.6}", stage.number());
        }
    }));
    let s1 = train_stage1(&mut trainer)?;
    println!(
        "stage 1: {} steps, final loss {:.6}{}",
        s1.steps_run,
        last_loss(&s1.trace),
        plateau_note(s1.plateaued)
    );
    let stage1_path = out.join(STAGE1_CHECKPOINT);
    write_checkpoint(&trainer, &stage1_path)?;
    let final_path = out.join(FINAL_CHECKPOINT);
    let mut trace = s1.trace;
    let mut stage2_steps = 0;
    if stage2 {
        let s2 = train_stage2(&mut trainer)?;
        println!(
            "stage 2: {} steps, final loss {:.6}{}",
            s2.steps_run,
            last_loss(&s2.trace),
            plateau_note(s2.plateaued)
        );
        stage2_steps = s2.steps_run;
        let offset = trace.records.len();
        trace.records.extend(s2.trace.records.into_iter().map(|mut r| {
            r.step += offset;
            r
        }));
        write_checkpoint(&trainer, &final_path)?;
    } else {
        println!("stage 2 skipped");
        std::fs::copy(&stage1_path, &final_path).map_err(|e| CliError::io(&final_path, e))?;
    }
    let trace_path = out.join(LOSS_TRACE);
    trace.write(&trace_path).map_err(at(&trace_path))?;
    Ok(TrainSummary {
        stage1_steps: trace.records.len() - stage2_steps,
        stage2_steps,
        trace,
    })
}

fn last_loss(trace: &LossTrace) -> f64 {
    trace.records.last().map_or(f64::NAN, |r| r.loss)
}

fn plateau_note(plateaued: bool) -> &'static str {
    if plateaued {
        " (plateau)"
    } else {
        ""
    }
}

/// Occupancy probabilities of a trained model, as a meshing field.
pub fn model_field<'a>(
    params: &'a ModelParams,
    points: &[[f64; 3]],
    threads: usize,
) -> CliResult<impl FnMut(&[[f64; 3]]) -> gridformer::Result<Vec<f64>> + 'a> {
    let field = encode(params, points)?;
    Ok(move |q: &[[f64; 3]]| {
        Ok(decode(params, &field, q, threads)?
            .into_iter()
            .map(occupancy_probability)
            .collect())
    })
}

pub fn extract_mesh(
    field: &mut impl FnMut(&[[f64; 3]]) -> gridformer::Result<Vec<f64>>,
    m: &MeshingConfig,
) -> CliResult<MiseOutput> {
    let out = if m.dense {
        dense_extract(field, m.mise_initial_res << m.mise_steps, m.tau)?
    } else {
        mise_extract(field, m.mise_initial_res, m.mise_steps, m.tau)?
    };
    if out.mesh.is_empty() {
        return Err(Error::EmptyMesh.into());
    }
    Ok(out)
}

pub fn cmd_reconstruct(cfg: &ExperimentConfig, checkpoint: &Path, dataset: &Path, out: &Path) -> CliResult<MiseOutput> {
    write_config(cfg, out)?;
    let ck = Checkpoint::read(checkpoint).map_err(at(checkpoint))?;
    if ck.params.config() != &cfg.model {
        return Err(CliError::Config(format!(
            "{} was trained with a different model config than the one given; \
             pass the same config and flags used for training",
            checkpoint.display()
        )));
    }
    let ds = Dataset::read(dataset).map_err(at(dataset))?;
    let mut field = model_field(&ck.params, &ds.points.coords, thread_count()?)?;
    let res = extract_mesh(&mut field, &cfg.meshing).map_err(|e| {
        if let CliError::Core(Error::EmptyMesh) = e {
            log::error!("field never crosses tau = {}; no surface to extract", cfg.meshing.tau);
        }
        e
    })?;
    let path = out.join(MESH_FILE);
    write_obj(&res.mesh, &path).map_err(at(&path))?;
    println!(
        "vertices {} triangles {} evaluations {}",
        res.mesh.vertices.len(),
        res.mesh.triangles.len(),
        res.evaluations
    );
    Ok(res)
}

pub fn cmd_eval(cfg: &ExperimentConfig, mesh: &Path, out: &Path) -> CliResult<MetricsReport> {
    write_config(cfg, out)?;
    let m: Mesh = read_obj(mesh).map_err(at(mesh))?;
    let report = evaluate_reconstruction(&m, &cfg.shape.to_spec(), &cfg.eval)?;
    let text = report.to_text();
    let path = out.join(METRICS_FILE);
    std::fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
    print!("{text}");
    Ok(report)
}

/// Outcome of the gradient suite.
#[derive(Debug, Clone)]
pub struct GradcheckSummary {
    pub primitives: Vec<(Primitive, f64)>,
    /// `(margin, worst relative error)` of the end-to-end loss checks.
    pub losses: Vec<(f64, f64)>,
}

impl GradcheckSummary {
    /// Name and error of every check over its tolerance.
    pub fn failures(&self) -> Vec<(String, f64)> {
        let prim = self
            .primitives
            .iter()
            .filter(|(_, e)| e.is_nan() || *e >= PRIMITIVE_TOLERANCE)
            .map(|(p, e)| (p.name().to_string(), *e));
        let loss = self
            .losses
            .iter()
            .filter(|(_, e)| e.is_nan() || *e >= LOSS_TOLERANCE)
            .map(|(m, e)| (format!("loss(margin={m:?})"), *e));
        prim.chain(loss).collect()
    }
}

pub fn run_gradcheck(trials: usize, seed: u64) -> CliResult<GradcheckSummary> {
    let primitives = primitive_suite(trials, seed)?;
    let mut losses = Vec::new();
    for margin in [0.0, 2.0] {
        let mut worst: f64 = 0.0;
        for s in 0..trials as u64 {
            worst = worst.max(micro_loss_gradcheck(margin, seed + s)?.max_rel_err);
        }
        losses.push((margin, worst));
    }
    Ok(GradcheckSummary { primitives, losses })
}

pub fn cmd_gradcheck(trials: usize, seed: u64) -> CliResult<GradcheckSummary> {
    let summary = run_gradcheck(trials, seed)?;
    let mut stdout = std::io::stdout().lock();
    for (p, e) in &summary.primitives {
        let _ = writeln!(stdout, "{:<18} {e:.3e}", p.name());
    }
    for (m, e) in &summary.losses {
        let _ = writeln!(stdout, "{:<18} {e:.3e}", format!("loss(margin={m:?})"));
    }
    let worst = summary
        .primitives
        .iter()
        .map(|(p, e)| (p.name().to_string(), *e / PRIMITIVE_TOLERANCE, *e))
        .chain(
            summary
                .losses
                .iter()
                .map(|(m, e)| (format!("loss(margin={m:?})"), *e / LOSS_TOLERANCE, *e)),
        )
        .fold(None::<(String, f64, f64)>, |acc, x| match acc {
            Some(a) if !x.1.is_nan() && x.1 <= a.1 => Some(a),
            _ => Some(x),
        });
    if let Some((name, _, e)) = worst {
        let _ = writeln!(stdout, "worst: {name} {e:.3e}");
    }
    let failures = summary.failures();
    if !failures.is_empty() {
        let names: Vec<String> = failures.iter().map(|(n, e)| format!("{n} ({e:.3e})")).collect();
        return Err(CliError::Gradcheck(names.join(", ")));
    }
    Ok(summary)
}
