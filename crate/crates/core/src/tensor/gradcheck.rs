use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConvMode, Primitive, Reduce, Resample, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Outcome of comparing reverse-mode gradients with central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckReport {
    pub max_rel_err: f64,
    /// `(input, coordinate)` of the worst disagreement.
    pub worst: (usize, usize),
    pub analytic: f64,
    pub numeric: f64,
    pub coordinates: usize,
}

const DENOM_FLOOR: f64 = 1e-8;

/// Checks the gradient of a scalar function built from tape primitives.
///
/// Every coordinate of every input is perturbed by `±h`; the relative error
/// `|a - n| / max(|a|, |n|, 1e-8)` is maximised over all coordinates.
pub fn gradcheck<F>(f: F, inputs: &[Tensor], h: f64) -> Result<GradcheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let eval = |vals: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = vals.iter().map(|t| tape.constant(t.clone())).collect();
        let out = f(&mut tape, &vars)?;
        scalar(&tape, out)
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs
        .iter()
        .map(|t| tape.leaf(t.detached().requires_grad(true)))
        .collect();
    let out = f(&mut tape, &vars)?;
    scalar(&tape, out)?;
    tape.backward(out)?;
    let analytic: Vec<Vec<f64>> = vars
        .iter()
        .zip(inputs)
        .map(|(&v, t)| tape.grad(v).map_or_else(|| vec![0.0; t.len()], <[f64]>::to_vec))
        .collect();
    drop(tape);

    let mut report = GradcheckReport {
        max_rel_err: 0.0,
        worst: (0, 0),
        analytic: 0.0,
        numeric: 0.0,
        coordinates: 0,
    };
    let mut probe: Vec<Tensor> = inputs.iter().map(Tensor::detached).collect();
    for (i, grads) in analytic.iter().enumerate() {
        for (j, &a) in grads.iter().enumerate() {
            let orig = probe[i].data()[j];
            probe[i].data_mut()[j] = orig + h;
            let fp = eval(&probe)?;
            probe[i].data_mut()[j] = orig - h;
            let fm = eval(&probe)?;
            probe[i].data_mut()[j] = orig;
            let n = (fp - fm) / (2.0 * h);
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(DENOM_FLOOR);
            report.coordinates += 1;
            if rel > report.max_rel_err || report.coordinates == 1 {
                report.max_rel_err = rel;
                report.worst = (i, j);
                report.analytic = a;
                report.numeric = n;
            }
        }
    }
    Ok(report)
}

fn scalar(tape: &Tape, v: Var) -> Result<f64> {
    let t = tape.value(v);
    if t.len() != 1 {
        return Err(Error::Contract(format!(
            "gradcheck needs a scalar-valued function, got shape {:?}",
            t.shape()
        )));
    }
    Ok(t.data()[0])
}

fn rand_tensor(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Tensor::new(shape, data).expect("shape and data agree")
}

/// `Σ r ⊙ y` with fixed random `|r| ∈ [0.5, 1]`, so every output
/// coordinate is live and none is scaled toward zero.
pub(crate) fn weighted_sum(tape: &mut Tape, y: Var, seed: u64) -> Result<Var> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = tape.value(y).shape().to_vec();
    let mut r = rand_tensor(&mut rng, shape);
    for v in r.data_mut() {
        *v = v.signum() * (0.5 + 0.5 * v.abs());
    }
    let r = tape.constant(r);
    let p = tape.mul(y, r)?;
    Ok(tape.sum(p))
}

type ScalarFn = Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var>>;

/// Step for central differences. Functions at most quadratic in each input
/// coordinate have no truncation error, so a wide step only shrinks
/// cancellation noise. For smooth ones the step balances truncation against
/// roundoff (about ε^⅓).
const H_LINEAR: f64 = 0.5;
const H_KINK: f64 = 0.01;
const H_SMOOTH: f64 = 6e-6;

fn random_case(rng: &mut ChaCha8Rng, prim: Primitive, seed: u64) -> (Vec<Tensor>, ScalarFn, f64) {
    let n = rng.random_range(1..6);
    let c = rng.random_range(1..4);
    let res = rng.random_range(1..4);
    let cells = res * res * res;
    match prim {
        Primitive::Linear => {
            let cout = rng.random_range(1..4);
            let inputs = vec![
                rand_tensor(rng, vec![n, c]),
                rand_tensor(rng, vec![c, cout]),
                rand_tensor(rng, vec![cout]),
            ];
            let f: ScalarFn = Box::new(move |t, v| {
                let y = t.linear(v[0], v[1], v[2])?;
                weighted_sum(t, y, seed)
            });
            (inputs, f, H_LINEAR)
        }
        Primitive::Relu => {
            // keep every coordinate clear of the kink
            let mut x = rand_tensor(rng, vec![n, c]);
            for v in x.data_mut() {
                *v = v.signum() * (0.05 + v.abs());
            }
            let f: ScalarFn = Box::new(move |t, v| {
                let y = t.relu(v[0]);
                weighted_sum(t, y, seed)
            });
            (vec![x], f, H_KINK)
        }
        Primitive::Sigmoid => {
            let mut x = rand_tensor(rng, vec![n, c]);
            x.data_mut().iter_mut().for_each(|v| *v *= 4.0);
            let f: ScalarFn = Box::new(move |t, v| {
                let y = t.sigmoid(v[0]);
                weighted_sum(t, y, seed)
            });
            (vec![x], f, H_SMOOTH)
        }
        Primitive::Elementwise => {
            let inputs = vec![rand_tensor(rng, vec![n, c]), rand_tensor(rng, vec![n, c])];
            let f: ScalarFn = Box::new(move |t, v| {
                let a = t.add(v[0], v[1])?;
                let s = t.sub(a, v[1])?;
                let m = t.mul(s, v[1])?;
                let offs = vec![0.5; t.value(m).len()];
                let k = t.add_const(m, &offs)?;
                weighted_sum(t, k, seed)
            });
            // at most quadratic: central differences are exact
            (inputs, f, H_LINEAR)
        }
        Primitive::Gather => {
            let idx: Vec<usize> = (0..n + 2).map(|_| rng.random_range(0..n)).collect();
            let f: ScalarFn = Box::new(move |t, v| {
                let y = t.gather_rows(v[0], &idx)?;
                weighted_sum(t, y, seed)
            });
            (vec![rand_tensor(rng, vec![n, c])], f, H_LINEAR)
        }
        Primitive::GroupSoftmax => {
            // Σ softmax(x) ⊙ x has gradient s_i (1 + x_i − Σ_j s_j x_j);
            // with |x| ≤ 0.4 that stays above s_i / 5, so no coordinate is
            // lost to cancellation.
            let groups: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let mut x = rand_tensor(rng, vec![n, c]);
            x.data_mut().iter_mut().for_each(|v| *v *= 0.4);
            let f: ScalarFn = Box::new(move |t, v| {
                let y = t.group_softmax(v[0], &groups, 3)?;
                let p = t.mul(y, v[0])?;
                Ok(t.sum(p))
            });
            (vec![x], f, H_SMOOTH)
        }
        Primitive::ScatterReduce => {
            let ids: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
            let mode = if rng.random_bool(0.5) {
                Reduce::Mean
            } else {
                Reduce::Sum
            };
            let f: ScalarFn = Box::new(move |t, v| {
                let y = t.scatter_reduce(v[0], &ids, 4, mode)?;
                weighted_sum(t, y, seed)
            });
            (vec![rand_tensor(rng, vec![n, c])], f, H_LINEAR)
        }
        Primitive::GridInterpolate => {
            let pts: Vec<[f64; 3]> = (0..n)
                .map(|_| std::array::from_fn(|_| rng.random_range(0.0..=1.0)))
                .collect();
            let f: ScalarFn = Box::new(move |t, v| {
                let y = t.grid_interpolate(v[0], res, &pts)?;
                weighted_sum(t, y, seed)
            });
            (vec![rand_tensor(rng, vec![cells, c])], f, H_LINEAR)
        }
        Primitive::Conv3 => {
            let depthwise = rng.random_bool(0.5);
            let (mode, rows, cout) = if depthwise {
                (ConvMode::Depthwise, 27, c)
            } else {
                (ConvMode::Full, 27 * c, rng.random_range(1..4))
            };
            let inputs = vec![
                rand_tensor(rng, vec![cells, c]),
                rand_tensor(rng, vec![rows, cout]),
                rand_tensor(rng, vec![cout]),
            ];
            let sites: Option<Vec<usize>> = rng
                .random_bool(0.5)
                .then(|| (0..n).map(|_| rng.random_range(0..cells)).collect());
            let f: ScalarFn = Box::new(move |t, v| {
                let y = match &sites {
                    Some(s) => t.conv3_at(v[0], res, v[1], v[2], mode, s)?,
                    None => t.conv3(v[0], res, v[1], v[2], mode)?,
                };
                weighted_sum(t, y, seed)
            });
            // bilinear in (x, w): second differences vanish along each axis
            (inputs, f, H_LINEAR)
        }
        Primitive::Resample => {
            let (factor, r_in) = if rng.random_bool(0.5) {
                (Resample::Down2, 2 * res)
            } else {
                (Resample::Up2, res)
            };
            let f: ScalarFn = Box::new(move |t, v| {
                let y = t.resample_grid(v[0], r_in, factor)?;
                weighted_sum(t, y, seed)
            });
            (vec![rand_tensor(rng, vec![r_in * r_in * r_in, c])], f, H_LINEAR)
        }
        Primitive::Concat => {
            let inputs = vec![rand_tensor(rng, vec![n, c]), rand_tensor(rng, vec![n, 1])];
            let f: ScalarFn = Box::new(move |t, v| {
                let b = t.broadcast_cols(v[1], 2)?;
                let y = t.concat_cols(&[v[0], b])?;
                weighted_sum(t, y, seed)
            });
            (inputs, f, H_LINEAR)
        }
        Primitive::Bce => {
            let p = Tensor::new(vec![n], (0..n).map(|_| rng.random_range(0.05..0.95)).collect())
                .expect("shape and data agree");
            let labels: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..2u8))).collect();
            let f: ScalarFn = Box::new(move |t, v| t.bce(v[0], &labels));
            (vec![p], f, H_SMOOTH)
        }
        Primitive::Reduce => {
            let f: ScalarFn = Box::new(move |t, v| {
                let m = t.mean(v[0]);
                let s = t.sum(v[0]);
                let both = t.mul(m, s)?;
                Ok(both)
            });
            (vec![rand_tensor(rng, vec![n, c])], f, H_LINEAR)
        }
    }
}

/// Worst relative error per primitive over `trials` randomized instances.
pub fn primitive_suite(trials: usize, seed: u64) -> Result<Vec<(Primitive, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Vec<(Primitive, f64)> = Primitive::ALL.iter().map(|&p| (p, 0.0)).collect();
    for trial in 0..trials {
        for (prim, err) in worst.iter_mut() {
            let (inputs, f, h) = random_case(&mut rng, *prim, seed ^ (trial as u64) << 8);
            let r = gradcheck(f, &inputs, h)?;
            *err = err.max(r.max_rel_err);
        }
    }
    Ok(worst)
}
