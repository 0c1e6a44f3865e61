//! Point-grid transformer encoder and multi-resolution occupancy decoder.
//!
//! Parameters are a flat list of named tensors; [`Layout`] records which
//! slot each weight occupies. Forward passes bind the list onto a tape, so
//! training and finite-difference checks share one code path.

mod checkpoint;
mod decoder;
mod encoder;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{ConvMode, Tape, Tensor, Var};

pub use checkpoint::Checkpoint;
pub use decoder::{decode, decode_on_tape, occupancy_probability};
pub use encoder::{
    encode, encode_on_tape, grid_aggregate, localize, point_grid_attention, point_update, position_encoding,
    AttentionTrace, EncodedField, EncodedVars, LevelIndex, PreparedCloud,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionKind {
    /// One weight per channel (softmax per channel).
    Vector,
    /// One weight per point, shared by all channels.
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureCombine {
    Sum,
    Concat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub base_resolution: usize,
    pub channels: usize,
    pub unet_depth: usize,
    /// Trailing layers (in execution order) that aggregate with depthwise
    /// convolution.
    pub depthwise_last_k: usize,
    pub enable_downsampling: bool,
    /// Width the three decoder inputs are projected to.
    pub projection_dim: usize,
    pub decoder_hidden: usize,
    pub decoder_blocks: usize,
    pub attention: AttentionKind,
    pub feature_combine: FeatureCombine,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            base_resolution: 32,
            channels: 32,
            unet_depth: 4,
            depthwise_last_k: 3,
            enable_downsampling: true,
            projection_dim: 32,
            decoder_hidden: 32,
            decoder_blocks: 5,
            attention: AttentionKind::Vector,
            feature_combine: FeatureCombine::Sum,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Contract(m));
        if self.channels == 0 || self.projection_dim == 0 || self.decoder_hidden == 0 {
            return bad("channel widths must be positive".into());
        }
        if self.unet_depth < 3 {
            return bad(format!("unet_depth must be at least 3, got {}", self.unet_depth));
        }
        if self.base_resolution == 0 {
            return bad("base_resolution must be positive".into());
        }
        if self.enable_downsampling {
            let div = 1usize << (self.unet_depth - 2);
            if !self.base_resolution.is_multiple_of(div) {
                return bad(format!(
                    "base_resolution {} must be divisible by {div} with downsampling on",
                    self.base_resolution
                ));
            }
        }
        if self.depthwise_last_k > self.num_layers() {
            return bad(format!(
                "depthwise_last_k {} exceeds the {} layers",
                self.depthwise_last_k,
                self.num_layers()
            ));
        }
        Ok(())
    }

    /// Grid resolution at U-Net level `level`; the top two levels share
    /// the base resolution.
    pub fn level_resolution(&self, level: usize) -> usize {
        if !self.enable_downsampling || level <= 1 {
            self.base_resolution
        } else {
            self.base_resolution >> (level - 1)
        }
    }

    /// Encoder layers plus decoder layers.
    pub fn num_layers(&self) -> usize {
        2 * self.unet_depth - 1
    }

    /// U-Net level of layer `i` in execution order.
    pub fn layer_level(&self, i: usize) -> usize {
        let d = self.unet_depth;
        if i < d {
            i
        } else {
            2 * d - 2 - i
        }
    }

    pub fn layer_conv_mode(&self, i: usize) -> ConvMode {
        if i + self.depthwise_last_k >= self.num_layers() {
            ConvMode::Depthwise
        } else {
            ConvMode::Full
        }
    }

    /// Resolutions of `(f₁, f₂, f₃)`.
    pub fn output_resolutions(&self) -> [usize; 3] {
        [0, 1, 2].map(|l| self.level_resolution(l))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearSlots {
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpSlots {
    pub l1: LinearSlots,
    pub l2: LinearSlots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSlots {
    pub w: usize,
    pub b: usize,
    pub mode: ConvMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSlots {
    pub level: usize,
    pub res: usize,
    pub phi_pos: MlpSlots,
    pub phi_q: MlpSlots,
    pub phi_v: MlpSlots,
    pub phi_w: MlpSlots,
    pub psi_k: ConvSlots,
    pub grid_agg: ConvSlots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSlots {
    pub fc_c: LinearSlots,
    pub fc_0: LinearSlots,
    pub fc_1: LinearSlots,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderSlots {
    pub proj: [MlpSlots; 3],
    pub fc_p: LinearSlots,
    pub blocks: Vec<BlockSlots>,
    pub fc_out: LinearSlots,
}

/// Slot indices of every parameter group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub phi_point: MlpSlots,
    pub layers: Vec<LayerSlots>,
    pub decoder: DecoderSlots,
}

/// All learnable tensors of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    config: ModelConfig,
    names: Vec<String>,
    tensors: Vec<Tensor>,
    layout: Layout,
}

struct Builder<'a> {
    names: Vec<String>,
    tensors: Vec<Tensor>,
    rng: Option<&'a mut ChaCha8Rng>,
}

impl Builder<'_> {
    fn push(&mut self, name: String, shape: Vec<usize>, bound: f64) -> usize {
        let mut t = Tensor::zeros(shape);
        if let Some(rng) = self.rng.as_deref_mut() {
            if bound > 0.0 {
                for v in t.data_mut() {
                    *v = rng.random_range(-bound..bound);
                }
            }
        }
        self.names.push(name);
        self.tensors.push(t);
        self.tensors.len() - 1
    }

    fn linear(&mut self, name: &str, cin: usize, cout: usize) -> LinearSlots {
        let bound = 1.0 / (cin as f64).sqrt();
        LinearSlots {
            w: self.push(format!("{name}.weight"), vec![cin, cout], bound),
            b: self.push(format!("{name}.bias"), vec![cout], bound),
        }
    }

    fn zero_linear(&mut self, name: &str, cin: usize, cout: usize) -> LinearSlots {
        LinearSlots {
            w: self.push(format!("{name}.weight"), vec![cin, cout], 0.0),
            b: self.push(format!("{name}.bias"), vec![cout], 0.0),
        }
    }

    fn mlp(&mut self, name: &str, cin: usize, hidden: usize, cout: usize) -> MlpSlots {
        MlpSlots {
            l1: self.linear(&format!("{name}.0"), cin, hidden),
            l2: self.linear(&format!("{name}.1"), hidden, cout),
        }
    }

    fn conv(&mut self, name: &str, c: usize, mode: ConvMode) -> ConvSlots {
        let rows = match mode {
            ConvMode::Full => 27 * c,
            ConvMode::Depthwise => 27,
        };
        let bound = 1.0 / (rows as f64).sqrt();
        ConvSlots {
            w: self.push(format!("{name}.weight"), vec![rows, c], bound),
            b: self.push(format!("{name}.bias"), vec![c], bound),
            mode,
        }
    }
}

impl ModelParams {
    /// Fresh parameters: uniform `±1/√fan_in` draws from a seeded ChaCha8
    /// stream, final decoder layer zero.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::build(config, Some(&mut rng))
    }

    /// All-zero parameters with the layout of `config`.
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        Self::build(config, None)
    }

    fn build(config: &ModelConfig, rng: Option<&mut ChaCha8Rng>) -> Result<Self> {
        config.validate()?;
        let c = config.channels;
        let mut b = Builder {
            names: Vec::new(),
            tensors: Vec::new(),
            rng,
        };
        let phi_point = b.mlp("phi_point", 3, c, c);
        let mut layers = Vec::with_capacity(config.num_layers());
        for i in 0..config.num_layers() {
            let level = config.layer_level(i);
            let p = format!("layer{i}");
            let w_out = match config.attention {
                AttentionKind::Vector => c,
                AttentionKind::Scalar => 1,
            };
            layers.push(LayerSlots {
                level,
                res: config.level_resolution(level),
                phi_pos: b.mlp(&format!("{p}.phi_pos"), 3, c, c),
                phi_q: b.mlp(&format!("{p}.phi_q"), c, c, c),
                phi_v: b.mlp(&format!("{p}.phi_v"), c, c, c),
                phi_w: b.mlp(&format!("{p}.phi_w"), c, c, w_out),
                psi_k: b.conv(&format!("{p}.psi_k"), c, ConvMode::Full),
                grid_agg: b.conv(&format!("{p}.grid_agg"), c, config.layer_conv_mode(i)),
            });
        }
        let pd = config.projection_dim;
        let h = config.decoder_hidden;
        let proj = [0, 1, 2].map(|k| b.mlp(&format!("proj{k}"), c, pd, pd));
        let fq_dim = match config.feature_combine {
            FeatureCombine::Sum => pd,
            FeatureCombine::Concat => 3 * pd,
        };
        let fc_p = b.linear("decoder.fc_p", 3, h);
        let blocks = (0..config.decoder_blocks)
            .map(|k| BlockSlots {
                fc_c: b.linear(&format!("decoder.fc_c{k}"), fq_dim, h),
                fc_0: b.linear(&format!("decoder.block{k}.fc_0"), h, h),
                fc_1: b.linear(&format!("decoder.block{k}.fc_1"), h, h),
            })
            .collect();
        let fc_out = b.zero_linear("decoder.fc_out", h, 1);
        Ok(Self {
            config: config.clone(),
            names: b.names,
            tensors: b.tensors,
            layout: Layout {
                phi_point,
                layers,
                decoder: DecoderSlots {
                    proj,
                    fc_p,
                    blocks,
                    fc_out,
                },
            },
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.names.iter().position(|n| n == name).map(|i| &self.tensors[i])
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Records every tensor on `tape`, differentiable iff `trainable`.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> Vec<Var> {
        self.tensors
            .iter()
            .map(|t| {
                if trainable {
                    tape.leaf(t.detached().requires_grad(true))
                } else {
                    tape.constant(t.detached())
                }
            })
            .collect()
    }

    /// Replaces the tensor values, keeping names and layout.
    pub fn with_tensors(&self, tensors: Vec<Tensor>) -> Result<Self> {
        if tensors.len() != self.tensors.len() || tensors.iter().zip(&self.tensors).any(|(a, b)| a.shape() != b.shape())
        {
            return Err(Error::Contract("parameter list does not match the layout".into()));
        }
        Ok(Self {
            tensors,
            ..self.clone()
        })
    }
}

pub(crate) fn linear(tape: &mut Tape, p: &[Var], s: LinearSlots, x: Var) -> Result<Var> {
    tape.linear(x, p[s.w], p[s.b])
}

/// `Linear₂(ReLU(Linear₁(x)))`.
pub(crate) fn mlp(tape: &mut Tape, p: &[Var], s: MlpSlots, x: Var) -> Result<Var> {
    let h = linear(tape, p, s.l1, x)?;
    let h = tape.relu(h);
    linear(tape, p, s.l2, h)
}

#[cfg(test)]
mod tests;
