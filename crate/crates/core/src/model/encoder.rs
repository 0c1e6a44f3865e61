use std::cmp::Ordering;

use super::{mlp, AttentionKind, LayerSlots, MlpSlots, ModelParams};
use crate::error::{Error, Result};
use crate::tensor::{axis_cell, cell_of, ConvMode, FeatureGrid, Reduce, Resample, Tape, Tensor, Var};

/// `p − ⌊p·res⌋/res`; a coordinate of 1.0 belongs to the last cell.
pub fn localize(p: [f64; 3], res: usize) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for axis in 0..3 {
        let c = p[axis];
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Domain(format!("coordinate {c} outside [0, 1] on axis {axis}")));
        }
        out[axis] = c - axis_cell(c, res) as f64 / res as f64;
    }
    Ok(out)
}

/// Cell membership of a sorted cloud at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelIndex {
    pub res: usize,
    /// Flattened cell per point.
    pub cells: Vec<usize>,
    /// Occupied cells, ascending.
    pub sites: Vec<usize>,
    /// Position of each point's cell in `sites`.
    pub slot: Vec<usize>,
    /// Localized coordinates, `N × 3`.
    pub local: Tensor,
}

/// Input cloud in canonical order with per-resolution indices.
///
/// Points are sorted lexicographically by coordinate, so every downstream
/// reduction sees the same order whatever order the caller used.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCloud {
    coords: Vec<[f64; 3]>,
    levels: Vec<LevelIndex>,
}

fn lex(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a[0].total_cmp(&b[0])
        .then(a[1].total_cmp(&b[1]))
        .then(a[2].total_cmp(&b[2]))
}

impl PreparedCloud {
    pub fn new(points: &[[f64; 3]], resolutions: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Contract("cannot encode an empty point cloud".into()));
        }
        let mut coords = points.to_vec();
        coords.sort_by(lex);
        let mut levels: Vec<LevelIndex> = Vec::new();
        for &res in resolutions {
            if levels.iter().any(|l| l.res == res) {
                continue;
            }
            let cells = coords.iter().map(|&p| cell_of(p, res)).collect::<Result<Vec<_>>>()?;
            let mut sites = cells.clone();
            sites.sort_unstable();
            sites.dedup();
            let slot = cells
                .iter()
                .map(|c| sites.binary_search(c).expect("cell is in sites"))
                .collect();
            let local = coords.iter().map(|&p| localize(p, res)).collect::<Result<Vec<_>>>()?;
            let local = Tensor::new(vec![coords.len(), 3], local.into_iter().flatten().collect())?;
            levels.push(LevelIndex {
                res,
                cells,
                sites,
                slot,
                local,
            });
        }
        Ok(Self { coords, levels })
    }

    /// Prepares `points` for every resolution the model uses.
    pub fn for_model(points: &[[f64; 3]], params: &ModelParams) -> Result<Self> {
        let res: Vec<usize> = params.layout().layers.iter().map(|l| l.res).collect();
        Self::new(points, &res)
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn level(&self, res: usize) -> Result<&LevelIndex> {
        self.levels
            .iter()
            .find(|l| l.res == res)
            .ok_or_else(|| Error::Contract(format!("cloud has no index at resolution {res}")))
    }

    pub fn coords_tensor(&self) -> Tensor {
        Tensor::new(vec![self.len(), 3], self.coords.iter().flatten().copied().collect()).expect("n × 3 coordinates")
    }
}

/// `φ_pos(local)`: one encoding per point.
pub fn position_encoding(tape: &mut Tape, p: &[Var], phi_pos: MlpSlots, local: Var) -> Result<Var> {
    mlp(tape, p, phi_pos, local)
}

/// Attention step of one layer.
///
/// Returns `(g + attention, v, weights)` where `v = φ_v(f_p)` is reused by
/// the point update and `weights` are the per-cell softmax weights.
#[allow(clippy::too_many_arguments)]
pub fn point_grid_attention(
    tape: &mut Tape,
    p: &[Var],
    layer: &LayerSlots,
    attention: AttentionKind,
    grid: Var,
    feats: Var,
    fpos: Var,
    level: &LevelIndex,
) -> Result<(Var, Var, Var)> {
    let res = layer.res;
    if level.res != res {
        return Err(Error::Contract(format!(
            "cell index at resolution {} used with a grid at {res}",
            level.res
        )));
    }
    let keys = tape.conv3_at(
        grid,
        res,
        p[layer.psi_k.w],
        p[layer.psi_k.b],
        ConvMode::Full,
        &level.sites,
    )?;
    let kp = tape.gather_rows(keys, &level.slot)?;
    let q = mlp(tape, p, layer.phi_q, feats)?;
    let v = mlp(tape, p, layer.phi_v, feats)?;
    let rel = tape.sub(kp, q)?;
    let rel = tape.add(rel, fpos)?;
    let logits = mlp(tape, p, layer.phi_w, rel)?;
    let k = level.sites.len();
    let weights = match attention {
        AttentionKind::Vector => tape.group_softmax(logits, &level.slot, k)?,
        AttentionKind::Scalar => {
            let w = tape.group_softmax(logits, &level.slot, k)?;
            let c = tape.value(v).dims2()?.1;
            tape.broadcast_cols(w, c)?
        }
    };
    let values = tape.add(v, fpos)?;
    let weighted = tape.mul(weights, values)?;
    let attn = tape.scatter_reduce(weighted, &level.cells, res * res * res, Reduce::Sum)?;
    let out = tape.add(grid, attn)?;
    Ok((out, v, weights))
}

/// `g + conv(g)` with the layer's full or depthwise kernel.
pub fn grid_aggregate(tape: &mut Tape, p: &[Var], layer: &LayerSlots, grid: Var) -> Result<Var> {
    let c = tape.conv3(
        grid,
        layer.res,
        p[layer.grid_agg.w],
        p[layer.grid_agg.b],
        layer.grid_agg.mode,
    )?;
    tape.add(grid, c)
}

/// `f_p + φ_v(f_p) + 𝒮(g, p)`.
pub fn point_update(tape: &mut Tape, feats: Var, v: Var, grid: Var, res: usize, coords: &[[f64; 3]]) -> Result<Var> {
    let sampled = tape.grid_interpolate(grid, res, coords)?;
    let out = tape.add(feats, v)?;
    tape.add(out, sampled)
}

/// Softmax weights of one layer, for inspection.
#[derive(Debug, Clone)]
pub struct AttentionTrace {
    pub layer: usize,
    pub res: usize,
    pub weights: Var,
}

/// Tape handles of an encoding.
#[derive(Debug, Clone)]
pub struct EncodedVars {
    /// `(f₁, f₂, f₃)` with their resolutions.
    pub grids: [(Var, usize); 3],
    /// Scatter-mean initial grid at the base resolution.
    pub initial_grid: Var,
    pub trace: Vec<AttentionTrace>,
}

/// Runs the U-Net encoder on `tape` with parameters bound to `p`.
pub fn encode_on_tape(tape: &mut Tape, params: &ModelParams, p: &[Var], cloud: &PreparedCloud) -> Result<EncodedVars> {
    let cfg = params.config();
    let layout = params.layout();
    let depth = cfg.unet_depth;
    let coords = tape.constant(cloud.coords_tensor());
    let mut feats = mlp(tape, p, layout.phi_point, coords)?;
    let base = cfg.base_resolution;
    let init_cells = &cloud.level(base)?.cells;
    let mut grid = tape.scatter_reduce(feats, init_cells, base * base * base, Reduce::Mean)?;
    let initial_grid = grid;
    let mut trace = Vec::with_capacity(layout.layers.len());
    let mut skips: Vec<Var> = Vec::with_capacity(depth);
    let mut outputs: Vec<Option<Var>> = vec![None; depth];
    let mut current_res = base;
    for (i, layer) in layout.layers.iter().enumerate() {
        if i >= depth {
            // decoder side: upsample where the resolution grows, add the skip
            if layer.res != current_res {
                grid = tape.resample_grid(grid, current_res, Resample::Up2)?;
            }
            grid = tape.add(grid, skips[layer.level])?;
        } else if layer.res != current_res {
            grid = tape.resample_grid(grid, current_res, Resample::Down2)?;
        }
        current_res = layer.res;
        let level = cloud.level(layer.res)?;
        let local = tape.constant(level.local.clone());
        let fpos = position_encoding(tape, p, layer.phi_pos, local)?;
        let (g1, v, weights) = point_grid_attention(tape, p, layer, cfg.attention, grid, feats, fpos, level)?;
        let g2 = grid_aggregate(tape, p, layer, g1)?;
        feats = point_update(tape, feats, v, g2, layer.res, cloud.coords())?;
        grid = g2;
        trace.push(AttentionTrace {
            layer: i,
            res: layer.res,
            weights,
        });
        if i < depth {
            skips.push(grid);
        }
        outputs[layer.level] = Some(grid);
    }
    let res = cfg.output_resolutions();
    let pick = |l: usize| outputs[l].expect("every level produces a grid");
    Ok(EncodedVars {
        grids: [(pick(0), res[0]), (pick(1), res[1]), (pick(2), res[2])],
        initial_grid,
        trace,
    })
}

/// Grids `(f₁, f₂, f₃)` produced by the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedField {
    pub grids: [FeatureGrid; 3],
}

/// Inference-only encoding of a raw point cloud.
pub fn encode(params: &ModelParams, points: &[[f64; 3]]) -> Result<EncodedField> {
    let cloud = PreparedCloud::for_model(points, params)?;
    let mut tape = Tape::new();
    let p = params.bind(&mut tape, false);
    let enc = encode_on_tape(&mut tape, params, &p, &cloud)?;
    let grid = |(v, res): (Var, usize)| FeatureGrid::from_tensor(res, tape.value(v));
    Ok(EncodedField {
        grids: [grid(enc.grids[0])?, grid(enc.grids[1])?, grid(enc.grids[2])?],
    })
}

impl EncodedField {
    pub fn resolutions(&self) -> [usize; 3] {
        [0, 1, 2].map(|k| self.grids[k].res())
    }
}
