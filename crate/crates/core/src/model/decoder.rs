use super::{linear, mlp, EncodedField, FeatureCombine, ModelParams};
use crate::error::{Error, Result};
use crate::tensor::{kernels::stable_sigmoid, Tape, Var};

/// Queries decoded per tape during inference.
const CHUNK: usize = 4096;

/// Occupancy logits `M × 1` for `queries` given the three encoder grids.
pub fn decode_on_tape(
    tape: &mut Tape,
    params: &ModelParams,
    p: &[Var],
    grids: &[(Var, usize); 3],
    queries: &[[f64; 3]],
) -> Result<Var> {
    let layout = &params.layout().decoder;
    let mut projected = Vec::with_capacity(3);
    for (k, &(grid, res)) in grids.iter().enumerate() {
        let f = tape.grid_interpolate(grid, res, queries)?;
        projected.push(mlp(tape, p, layout.proj[k], f)?);
    }
    let fq = match params.config().feature_combine {
        FeatureCombine::Sum => {
            let s = tape.add(projected[0], projected[1])?;
            tape.add(s, projected[2])?
        }
        FeatureCombine::Concat => tape.concat_cols(&projected)?,
    };
    let qt = crate::tensor::Tensor::new(vec![queries.len(), 3], queries.iter().flatten().copied().collect())?;
    let q = tape.constant(qt);
    let mut net = linear(tape, p, layout.fc_p, q)?;
    for block in &layout.blocks {
        let c = linear(tape, p, block.fc_c, fq)?;
        net = tape.add(net, c)?;
        let h = tape.relu(net);
        let h = linear(tape, p, block.fc_0, h)?;
        let h = tape.relu(h);
        let h = linear(tape, p, block.fc_1, h)?;
        net = tape.add(net, h)?;
    }
    let h = tape.relu(net);
    linear(tape, p, layout.fc_out, h)
}

/// Logits for `queries`, evaluated in fixed-size chunks.
///
/// With `threads > 1` chunks run concurrently; each chunk is computed
/// identically either way, so results do not depend on `threads`.
pub fn decode(params: &ModelParams, field: &EncodedField, queries: &[[f64; 3]], threads: usize) -> Result<Vec<f64>> {
    if let Some(q) = queries.iter().find(|q| !q.iter().all(|c| (0.0..=1.0).contains(c))) {
        return Err(Error::Domain(format!("query {q:?} outside [0, 1]³")));
    }
    let chunks: Vec<&[[f64; 3]]> = queries.chunks(CHUNK).collect();
    let run = |chunk: &[[f64; 3]]| -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let p = params.bind(&mut tape, false);
        let mut g = |k: usize| {
            let grid = &field.grids[k];
            (tape.constant(grid.to_tensor()), grid.res())
        };
        let grids = [g(0), g(1), g(2)];
        let out = decode_on_tape(&mut tape, params, &p, &grids, chunk)?;
        Ok(tape.value(out).data().to_vec())
    };
    let threads = threads.max(1).min(chunks.len().max(1));
    let mut parts: Vec<Result<Vec<f64>>> = Vec::with_capacity(chunks.len());
    if threads == 1 {
        parts.extend(chunks.iter().map(|c| run(c)));
    } else {
        let per = chunks.len().div_ceil(threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = chunks
                .chunks(per)
                .map(|group| s.spawn(|| group.iter().map(|c| run(c)).collect::<Vec<_>>()))
                .collect();
            for h in handles {
                parts.extend(h.join().expect("decode worker panicked"));
            }
        });
    }
    let mut logits = Vec::with_capacity(queries.len());
    for part in parts {
        logits.extend(part?);
    }
    Ok(logits)
}

/// Numerically stable logistic function.
pub fn occupancy_probability(logit: f64) -> f64 {
    stable_sigmoid(logit)
}
