//! Binary checkpoint container.
//!
//! Layout (little-endian): magic `GFCK`, version `u32`, the model config as
//! ten `u32` fields, tensor count `u32`, then per tensor: name length `u32`,
//! UTF-8 name, dtype `u8` (3 = f64), rank `u8`, extents `u32 × rank`, data.

use std::io::{Read, Write};
use std::path::Path;

use super::{AttentionKind, FeatureCombine, ModelConfig, ModelParams};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"GFCK";
const VERSION: u32 = 1;
const DTYPE_F64: u8 = 3;

/// Model parameters plus any extra named tensors (optimizer moments).
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub extra: Vec<(String, Tensor)>,
}

fn config_words(c: &ModelConfig) -> [u32; 10] {
    [
        c.base_resolution as u32,
        c.channels as u32,
        c.unet_depth as u32,
        c.depthwise_last_k as u32,
        u32::from(c.enable_downsampling),
        c.projection_dim as u32,
        c.decoder_hidden as u32,
        c.decoder_blocks as u32,
        match c.attention {
            AttentionKind::Vector => 0,
            AttentionKind::Scalar => 1,
        },
        match c.feature_combine {
            FeatureCombine::Sum => 0,
            FeatureCombine::Concat => 1,
        },
    ]
}

fn config_from_words(w: [u32; 10]) -> Result<ModelConfig> {
    let flag = |v: u32, what: &str| match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(Error::Format(format!("bad {what} code {v}"))),
    };
    Ok(ModelConfig {
        base_resolution: w[0] as usize,
        channels: w[1] as usize,
        unet_depth: w[2] as usize,
        depthwise_last_k: w[3] as usize,
        enable_downsampling: flag(w[4], "downsampling")?,
        projection_dim: w[5] as usize,
        decoder_hidden: w[6] as usize,
        decoder_blocks: w[7] as usize,
        attention: if flag(w[8], "attention")? {
            AttentionKind::Scalar
        } else {
            AttentionKind::Vector
        },
        feature_combine: if flag(w[9], "feature combine")? {
            FeatureCombine::Concat
        } else {
            FeatureCombine::Sum
        },
    })
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn write_tensor(w: &mut impl Write, name: &str, t: &Tensor) -> Result<()> {
    w.write_all(&(name.len() as u32).to_le_bytes())?;
    w.write_all(name.as_bytes())?;
    w.write_all(&[DTYPE_F64, t.shape().len() as u8])?;
    for &e in t.shape() {
        w.write_all(&(e as u32).to_le_bytes())?;
    }
    for v in t.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_tensor(r: &mut impl Read) -> Result<(String, Tensor)> {
    let len = read_u32(r)? as usize;
    if len > 4096 {
        return Err(Error::Format(format!("tensor name length {len} is implausible")));
    }
    let mut name = vec![0u8; len];
    r.read_exact(&mut name)?;
    let name = String::from_utf8(name).map_err(|_| Error::Format("tensor name is not UTF-8".into()))?;
    let mut head = [0u8; 2];
    r.read_exact(&mut head)?;
    if head[0] != DTYPE_F64 {
        return Err(Error::Format(format!(
            "tensor {name:?} has dtype {} (expected f64)",
            head[0]
        )));
    }
    let shape = (0..head[1])
        .map(|_| read_u32(r).map(|e| e as usize))
        .collect::<Result<Vec<_>>>()?;
    let n: usize = shape.iter().product();
    let mut raw = Vec::new();
    r.take(8 * n as u64).read_to_end(&mut raw)?;
    if raw.len() != 8 * n {
        return Err(Error::Format(format!("tensor {name:?} is truncated")));
    }
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((name, Tensor::new(shape, data)?))
}

impl Checkpoint {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            extra: Vec::new(),
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for v in config_words(self.params.config()) {
            w.write_all(&v.to_le_bytes())?;
        }
        let count = self.params.tensors().len() + self.extra.len();
        w.write_all(&(count as u32).to_le_bytes())?;
        for (name, t) in self.params.names().iter().zip(self.params.tensors()) {
            write_tensor(w, name, t)?;
        }
        for (name, t) in &self.extra {
            write_tensor(w, name, t)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad checkpoint magic {magic:?}")));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let mut words = [0u32; 10];
        for w in &mut words {
            *w = read_u32(r)?;
        }
        let config = config_from_words(words)?;
        let template = ModelParams::zeros(&config).map_err(|e| Error::Format(e.to_string()))?;
        let count = read_u32(r)? as usize;
        let mut tensors = Vec::with_capacity(template.tensors().len());
        let mut extra = Vec::new();
        for i in 0..count {
            let (name, t) = read_tensor(r)?;
            if i < template.names().len() {
                if name != template.names()[i] || t.shape() != template.tensors()[i].shape() {
                    return Err(Error::Format(format!(
                        "parameter {i} is {name:?} {:?}, expected {:?} {:?}",
                        t.shape(),
                        template.names()[i],
                        template.tensors()[i].shape()
                    )));
                }
                tensors.push(t);
            } else {
                extra.push((name, t));
            }
        }
        if tensors.len() != template.tensors().len() {
            return Err(Error::Format("checkpoint is missing parameters".into()));
        }
        Ok(Self {
            params: template.with_tensors(tensors)?,
            extra,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::read_from(&mut bytes.as_slice())
    }
}
