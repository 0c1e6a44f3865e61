//! Two-stage optimization: uniform BCE training, then margin-BCE finetuning
//! on boundary queries. Both stages share one Adam step.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{derive_seed, Dataset};
use crate::model::{decode_on_tape, encode_on_tape, ModelConfig, ModelParams, PreparedCloud};
use crate::tensor::{gradcheck, GradcheckReport, Tape, Tensor, Var};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub stage1_lr: f64,
    pub stage2_lr: f64,
    pub margin: f64,
    pub boundary_radius: f64,
    /// Queries per step.
    pub batch_points: usize,
    pub stage1_steps: usize,
    pub stage2_steps: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Moving-average window of the plateau rule; 0 disables it.
    pub plateau_window: usize,
    pub plateau_tolerance: f64,
    /// Global gradient-norm cap; `None` disables clipping.
    pub grad_clip: Option<f64>,
    /// Share of each stage-2 batch drawn from all queries instead of the
    /// boundary subset.
    pub stage2_uniform_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            stage1_lr: 1e-4,
            stage2_lr: 1e-6,
            margin: 2.0,
            boundary_radius: 0.08,
            batch_points: 2048,
            stage1_steps: 2000,
            stage2_steps: 500,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            plateau_window: 100,
            plateau_tolerance: 1e-5,
            grad_clip: None,
            stage2_uniform_fraction: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.stage1_lr > 0.0
            && self.stage2_lr > 0.0
            && self.margin >= 0.0
            && self.boundary_radius > 0.0
            && self.batch_points > 0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.plateau_tolerance >= 0.0
            && self.grad_clip.is_none_or(|c| c > 0.0)
            && (0.0..=1.0).contains(&self.stage2_uniform_fraction);
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("invalid training config: {self:?}")))
        }
    }
}

/// Adam moments, one pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &[Tensor]) -> Self {
        Self {
            m: params.iter().map(|t| vec![0.0; t.len()]).collect(),
            v: params.iter().map(|t| vec![0.0; t.len()]).collect(),
            step: 0,
        }
    }

    /// Moments as named tensors for a checkpoint.
    pub fn to_named(&self, params: &ModelParams) -> Vec<(String, Tensor)> {
        let mut out = vec![("adam.step".to_string(), Tensor::scalar(self.step as f64))];
        for (k, (name, t)) in params.names().iter().zip(params.tensors()).enumerate() {
            let shape = t.shape().to_vec();
            out.push((
                format!("adam.m.{name}"),
                Tensor::new(shape.clone(), self.m[k].clone()).expect("moment shape"),
            ));
            out.push((
                format!("adam.v.{name}"),
                Tensor::new(shape, self.v[k].clone()).expect("moment shape"),
            ));
        }
        out
    }
}

/// Bias-corrected Adam update, in place.
///
/// Fails without touching anything if a gradient is non-finite.
pub fn adam_step(
    params: &mut [Tensor],
    grads: &[Vec<f64>],
    state: &mut AdamState,
    lr: f64,
    (beta1, beta2): (f64, f64),
    eps: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::dim("adam_step", &[params.len()], &[grads.len()]));
    }
    for (k, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || state.m[k].len() != g.len() {
            return Err(Error::dim("adam_step", p.shape(), &[g.len()]));
        }
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("gradient of parameter {k} at coordinate {i}"),
                step: state.step as usize + 1,
            });
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let (m, v) = (&mut state.m[k], &mut state.v[k]);
        for (i, x) in p.data_mut().iter_mut().enumerate() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            let mh = m[i] / c1;
            let vh = v[i] / c2;
            *x -= lr * mh / (vh.sqrt() + eps);
        }
    }
    Ok(())
}

/// Mean binary cross-entropy with probabilities clamped to `[1e-7, 1−1e-7]`.
pub fn bce_loss(p_hat: &[f64], labels: &[f64]) -> Result<f64> {
    let mut tape = Tape::new();
    let p = tape.constant(Tensor::new(vec![p_hat.len()], p_hat.to_vec())?);
    let l = tape.bce(p, labels)?;
    Ok(tape.value(l).data()[0])
}

/// `σ(logit − m·(2l − 1))`.
pub fn margin_probability(logit: f64, label: bool, m: f64) -> f64 {
    let sign = if label { 1.0 } else { -1.0 };
    crate::model::occupancy_probability(logit - m * sign)
}

/// Loss of one batch recorded on `tape`; `margin = 0` is plain BCE.
#[allow(clippy::too_many_arguments)]
pub fn batch_loss(
    tape: &mut Tape,
    params: &ModelParams,
    p: &[Var],
    cloud: &PreparedCloud,
    queries: &[[f64; 3]],
    labels: &[f64],
    margin: f64,
) -> Result<Var> {
    let enc = encode_on_tape(tape, params, p, cloud)?;
    let logits = decode_on_tape(tape, params, p, &enc.grids, queries)?;
    let shifted = if margin != 0.0 {
        let shift: Vec<f64> = labels.iter().map(|&l| -margin * (2.0 * l - 1.0)).collect();
        tape.add_const(logits, &shift)?
    } else {
        logits
    };
    let prob = tape.sigmoid(shifted);
    tape.bce(prob, labels)
}

/// One forward/backward/Adam step. Returns the batch loss before the update.
#[allow(clippy::too_many_arguments)]
pub fn train_step(
    params: &mut ModelParams,
    state: &mut AdamState,
    cloud: &PreparedCloud,
    queries: &[[f64; 3]],
    labels: &[f64],
    lr: f64,
    margin: f64,
    cfg: &TrainConfig,
) -> Result<f64> {
    let mut tape = Tape::new();
    let p = params.bind(&mut tape, true);
    let loss = batch_loss(&mut tape, params, &p, cloud, queries, labels, margin)?;
    let value = tape.value(loss).data()[0];
    if !value.is_finite() {
        return Err(Error::NonFinite {
            what: "training loss".into(),
            step: state.step as usize + 1,
        });
    }
    tape.backward(loss)?;
    let mut grads: Vec<Vec<f64>> = p
        .iter()
        .zip(params.tensors())
        .map(|(&v, t)| tape.grad(v).map_or_else(|| vec![0.0; t.len()], <[f64]>::to_vec))
        .collect();
    drop(tape);
    if let Some(cap) = cfg.grad_clip {
        let norm = grads.iter().flatten().map(|g| g * g).sum::<f64>().sqrt();
        if norm > cap {
            let s = cap / norm;
            grads.iter_mut().flatten().for_each(|g| *g *= s);
        }
    }
    adam_step(params.tensors_mut(), &grads, state, lr, (cfg.beta1, cfg.beta2), cfg.eps)?;
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Uniform,
    Boundary,
}

impl Stage {
    pub fn number(self) -> u8 {
        match self {
            Stage::Uniform => 1,
            Stage::Boundary => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub stage: Stage,
    pub loss: f64,
    pub lr: f64,
}

/// Per-step losses of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    pub records: Vec<TraceRecord>,
}

impl LossTrace {
    /// Tab-separated `step stage loss lr` lines.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("step\tstage\tloss\tlr\n");
        for r in &self.records {
            writeln!(s, "{}\t{}\t{:e}\t{:e}", r.step, r.stage.number(), r.loss, r.lr).expect("string write");
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_tsv())?;
        Ok(())
    }

    pub fn losses(&self, stage: Stage) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.stage == stage)
            .map(|r| r.loss)
            .collect()
    }
}

/// Stops once the moving average over the last `window` losses improves
/// on the one before it by less than `tolerance`.
#[derive(Debug, Clone)]
pub struct PlateauDetector {
    window: usize,
    tolerance: f64,
    history: Vec<f64>,
}

impl PlateauDetector {
    pub fn new(window: usize, tolerance: f64) -> Self {
        Self {
            window,
            tolerance,
            history: Vec::new(),
        }
    }

    /// Records a loss; true when training should stop.
    pub fn push(&mut self, loss: f64) -> bool {
        self.history.push(loss);
        let w = self.window;
        let n = self.history.len();
        if w == 0 || n < 2 * w {
            return false;
        }
        let mean = |s: &[f64]| s.iter().sum::<f64>() / w as f64;
        let recent = mean(&self.history[n - w..]);
        let before = mean(&self.history[n - 2 * w..n - w]);
        before - recent < self.tolerance
    }
}

/// Epoch-wise shuffled draws without replacement from an index pool.
struct BatchSampler {
    pool: Vec<usize>,
    order: Vec<usize>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl BatchSampler {
    fn new(pool: Vec<usize>, seed: u64) -> Self {
        Self {
            order: Vec::new(),
            cursor: 0,
            pool,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn next(&mut self, n: usize) -> Vec<usize> {
        let n = n.min(self.pool.len());
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            if self.cursor == self.order.len() {
                self.order = self.pool.clone();
                self.order.shuffle(&mut self.rng);
                self.cursor = 0;
            }
            let take = (n - out.len()).min(self.order.len() - self.cursor);
            out.extend_from_slice(&self.order[self.cursor..self.cursor + take]);
            self.cursor += take;
        }
        out
    }
}

/// Outcome of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub trace: LossTrace,
    pub steps_run: usize,
    pub plateaued: bool,
}

/// Step callback receiving `(stage, step, loss)`.
pub type ProgressFn = Box<dyn FnMut(Stage, usize, f64)>;

/// Training session over one dataset: parameters, optimizer and the
/// prepared input cloud.
pub struct Trainer {
    pub params: ModelParams,
    pub state: AdamState,
    cloud: PreparedCloud,
    dataset: Dataset,
    cfg: TrainConfig,
    /// Called after every step with `(stage, step, loss)`.
    pub progress: Option<ProgressFn>,
}

impl Trainer {
    pub fn new(params: ModelParams, dataset: Dataset, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let cloud = PreparedCloud::for_model(&dataset.points.coords, &params)?;
        Ok(Self {
            state: AdamState::new(params.tensors()),
            params,
            cloud,
            dataset,
            cfg,
            progress: None,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn cloud(&self) -> &PreparedCloud {
        &self.cloud
    }

    /// Indices a stage draws from.
    pub fn stage_pool(&self, stage: Stage) -> Result<Vec<usize>> {
        let q = &self.dataset.queries;
        match stage {
            Stage::Uniform => Ok((0..q.len()).collect()),
            Stage::Boundary => {
                let pool: Vec<usize> = (0..q.len()).filter(|&i| q.boundary_mask[i]).collect();
                if pool.is_empty() {
                    return Err(Error::EmptyBoundary);
                }
                Ok(pool)
            }
        }
    }

    fn batch(&self, idx: &[usize]) -> (Vec<[f64; 3]>, Vec<f64>) {
        let q = &self.dataset.queries;
        (
            idx.iter().map(|&i| q.coords[i]).collect(),
            idx.iter().map(|&i| f64::from(u8::from(q.labels[i]))).collect(),
        )
    }

    /// One step on explicit query indices.
    pub fn step_on(&mut self, idx: &[usize], lr: f64, margin: f64) -> Result<f64> {
        let (queries, labels) = self.batch(idx);
        train_step(
            &mut self.params,
            &mut self.state,
            &self.cloud,
            &queries,
            &labels,
            lr,
            margin,
            &self.cfg,
        )
    }

    /// Runs a stage for its step budget or until the loss plateaus.
    pub fn run_stage(&mut self, stage: Stage) -> Result<StageReport> {
        let (steps, lr, margin, stream) = match stage {
            Stage::Uniform => (self.cfg.stage1_steps, self.cfg.stage1_lr, 0.0, 10),
            Stage::Boundary => (self.cfg.stage2_steps, self.cfg.stage2_lr, self.cfg.margin, 20),
        };
        let pool = self.stage_pool(stage)?;
        let mut sampler = BatchSampler::new(pool, derive_seed(self.cfg.seed, stream));
        let mut uniform = BatchSampler::new(self.stage_pool(Stage::Uniform)?, derive_seed(self.cfg.seed, stream + 1));
        if stage == Stage::Boundary {
            // finetuning starts from fresh moments at its own rate
            self.state = AdamState::new(self.params.tensors());
        }
        let n_uniform = match stage {
            Stage::Uniform => 0,
            Stage::Boundary => (self.cfg.stage2_uniform_fraction * self.cfg.batch_points as f64).round() as usize,
        };
        let mut plateau = PlateauDetector::new(self.cfg.plateau_window, self.cfg.plateau_tolerance);
        let mut trace = LossTrace::default();
        let mut plateaued = false;
        for step in 0..steps {
            let mut idx = sampler.next(self.cfg.batch_points - n_uniform);
            idx.extend(uniform.next(n_uniform));
            let loss = self.step_on(&idx, lr, margin).map_err(|e| match e {
                Error::NonFinite { what, .. } => Error::NonFinite { what, step },
                other => other,
            })?;
            trace.records.push(TraceRecord { step, stage, loss, lr });
            if let Some(cb) = self.progress.as_mut() {
                cb(stage, step, loss);
            }
            if plateau.push(loss) {
                plateaued = true;
                break;
            }
        }
        Ok(StageReport {
            steps_run: trace.records.len(),
            trace,
            plateaued,
        })
    }
}

/// Stage 1 on uniform queries.
pub fn train_stage1(trainer: &mut Trainer) -> Result<StageReport> {
    trainer.run_stage(Stage::Uniform)
}

/// Stage 2 on boundary queries with the margin loss.
pub fn train_stage2(trainer: &mut Trainer) -> Result<StageReport> {
    trainer.run_stage(Stage::Boundary)
}

/// Finite-difference check of the full training loss on a micro instance:
/// five random points, a 4³ base grid, eight labelled queries.
///
/// The output layer is randomized so every parameter group gets gradient.
pub fn micro_loss_gradcheck(margin: f64, seed: u64) -> Result<GradcheckReport> {
    let cfg = ModelConfig {
        base_resolution: 4,
        channels: 3,
        unet_depth: 4,
        depthwise_last_k: 3,
        enable_downsampling: true,
        projection_dim: 4,
        decoder_hidden: 8,
        decoder_blocks: 2,
        ..ModelConfig::default()
    };
    let mut params = ModelParams::init(&cfg, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
    let out = params.layout().decoder.fc_out;
    for slot in [out.w, out.b] {
        for v in params.tensors_mut()[slot].data_mut() {
            *v = rng.random_range(-0.5..0.5);
        }
    }
    let mut point = || -> [f64; 3] { std::array::from_fn(|_| rng.random_range(0.0..1.0)) };
    let pts: Vec<[f64; 3]> = (0..5).map(|_| point()).collect();
    let queries: Vec<[f64; 3]> = (0..8).map(|_| point()).collect();
    let labels: Vec<f64> = (0..8).map(|i| (i % 2) as f64).collect();
    let cloud = PreparedCloud::for_model(&pts, &params)?;
    gradcheck(
        |t, v| batch_loss(t, &params, v, &cloud, &queries, &labels, margin),
        params.tensors(),
        LOSS_CHECK_STEP,
    )
}

/// Central-difference step for [`micro_loss_gradcheck`].
pub const LOSS_CHECK_STEP: f64 = 1e-4;

#[cfg(test)]
mod tests;
