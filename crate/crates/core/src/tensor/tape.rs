use std::sync::atomic::{AtomicU8, Ordering};

use super::kernels::{self, col2im, gemm, im2col, interp_taps, neighbor, unflatten, CONV_BLOCK};
use super::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMode {
    /// Every output channel mixes all input channels.
    Full,
    /// One spatial kernel per channel, no channel mixing.
    Depthwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduce {
    Mean,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resample {
    /// 2×2×2 average pooling.
    Down2,
    /// Nearest-neighbour repetition.
    Up2,
}

/// Primitive families, used for fault injection and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Primitive {
    Linear = 1,
    Relu,
    Sigmoid,
    Elementwise,
    Gather,
    GroupSoftmax,
    ScatterReduce,
    GridInterpolate,
    Conv3,
    Resample,
    Concat,
    Bce,
    Reduce,
}

impl Primitive {
    pub const ALL: [Primitive; 13] = [
        Primitive::Linear,
        Primitive::Relu,
        Primitive::Sigmoid,
        Primitive::Elementwise,
        Primitive::Gather,
        Primitive::GroupSoftmax,
        Primitive::ScatterReduce,
        Primitive::GridInterpolate,
        Primitive::Conv3,
        Primitive::Resample,
        Primitive::Concat,
        Primitive::Bce,
        Primitive::Reduce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Linear => "linear",
            Primitive::Relu => "relu",
            Primitive::Sigmoid => "sigmoid",
            Primitive::Elementwise => "elementwise",
            Primitive::Gather => "gather",
            Primitive::GroupSoftmax => "group_softmax",
            Primitive::ScatterReduce => "scatter_reduce",
            Primitive::GridInterpolate => "grid_interpolate",
            Primitive::Conv3 => "conv3",
            Primitive::Resample => "resample_grid",
            Primitive::Concat => "concat",
            Primitive::Bce => "bce",
            Primitive::Reduce => "reduce",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

static BACKWARD_FAULT: AtomicU8 = AtomicU8::new(0);

/// Test hook: perturbs the backward pass of one primitive so gradient
/// checking can be shown to catch it. `None` restores correct behaviour.
#[doc(hidden)]
pub fn set_backward_fault(p: Option<Primitive>) {
    BACKWARD_FAULT.store(p.map_or(0, |p| p as u8), Ordering::SeqCst);
}

/// Output cells `start..end` of a convolution, as flat cell indices.
fn site_block(sites: &Option<Vec<usize>>, start: usize, end: usize) -> std::borrow::Cow<'_, [usize]> {
    match sites {
        Some(s) => std::borrow::Cow::Borrowed(&s[start..end]),
        None => std::borrow::Cow::Owned((start..end).collect()),
    }
}

fn fault_scale(p: Primitive) -> f64 {
    if BACKWARD_FAULT.load(Ordering::Relaxed) == p as u8 {
        1.01
    } else {
        1.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    Linear {
        x: Var,
        w: Var,
        b: Var,
    },
    Relu(Var),
    Sigmoid(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddConst(Var),
    Gather {
        x: Var,
        index: Vec<usize>,
    },
    GroupSoftmax {
        x: Var,
        groups: Vec<usize>,
        num_groups: usize,
    },
    Scatter {
        x: Var,
        cells: Vec<usize>,
        inv_count: Option<Vec<f64>>,
    },
    Interp {
        grid: Var,
        taps: Vec<[(usize, f64); 8]>,
    },
    Conv {
        x: Var,
        w: Var,
        b: Var,
        res: usize,
        mode: ConvMode,
        sites: Option<Vec<usize>>,
    },
    Resample {
        x: Var,
        res: usize,
        factor: Resample,
    },
    Concat(Vec<Var>),
    Broadcast {
        x: Var,
    },
    Bce {
        p: Var,
        labels: Vec<f64>,
    },
    Sum(Var),
    Mean(Var),
}

impl Op {
    fn primitive(&self) -> Option<Primitive> {
        Some(match self {
            Op::Leaf => return None,
            Op::Linear { .. } => Primitive::Linear,
            Op::Relu(_) => Primitive::Relu,
            Op::Sigmoid(_) => Primitive::Sigmoid,
            Op::Add(..) | Op::Sub(..) | Op::Mul(..) | Op::AddConst(_) => Primitive::Elementwise,
            Op::Gather { .. } => Primitive::Gather,
            Op::GroupSoftmax { .. } => Primitive::GroupSoftmax,
            Op::Scatter { .. } => Primitive::ScatterReduce,
            Op::Interp { .. } => Primitive::GridInterpolate,
            Op::Conv { .. } => Primitive::Conv3,
            Op::Resample { .. } => Primitive::Resample,
            Op::Concat(_) | Op::Broadcast { .. } => Primitive::Concat,
            Op::Bce { .. } => Primitive::Bce,
            Op::Sum(_) | Op::Mean(_) => Primitive::Reduce,
        })
    }
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Ordered record of executed operations.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Vec<f64>>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops every recorded value and gradient.
    pub fn clear(&mut self) {
        self.nodes.clear();
        self.grads.clear();
    }

    /// Records an input. It participates in differentiation iff
    /// `t.is_requires_grad()`.
    pub fn leaf(&mut self, t: Tensor) -> Var {
        let rg = t.is_requires_grad();
        let value = t.detached();
        self.push(value, Op::Leaf, rg)
    }

    /// Records a non-differentiable input.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t.detached(), Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient accumulated by the last [`Tape::backward`], if any reached `v`.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    fn mat(&self, v: Var, op: &'static str) -> Result<(usize, usize)> {
        let t = &self.nodes[v.0].value;
        t.dims2().map_err(|_| Error::dim(op, t.shape(), &[0, 0]))
    }

    // ---------------------------------------------------------------- ops

    /// `x · w + b` with `x: N×Cin`, `w: Cin×Cout`, `b: Cout`.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let (n, cin) = self.mat(x, "linear")?;
        let (wi, cout) = self.mat(w, "linear")?;
        if wi != cin {
            return Err(Error::dim("linear", self.value(x).shape(), self.value(w).shape()));
        }
        if self.value(b).len() != cout {
            return Err(Error::dim("linear", self.value(w).shape(), self.value(b).shape()));
        }
        let mut out = vec![0.0; n * cout];
        let bias = self.value(b).data();
        for row in out.chunks_exact_mut(cout) {
            row.copy_from_slice(bias);
        }
        gemm(
            n,
            cin,
            cout,
            self.value(x).data(),
            (cin, 1),
            self.value(w).data(),
            (cout, 1),
            1.0,
            &mut out,
        );
        let rg = self.rg(&[x, w, b]);
        Ok(self.push(Tensor::new(vec![n, cout], out)?, Op::Linear { x, w, b }, rg))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let data = t.data().iter().map(|&v| v.max(0.0)).collect();
        let shape = t.shape().to_vec();
        let rg = self.rg(&[x]);
        self.push(Tensor::new(shape, data).unwrap(), Op::Relu(x), rg)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let data = t.data().iter().map(|&v| kernels::stable_sigmoid(v)).collect();
        let shape = t.shape().to_vec();
        let rg = self.rg(&[x]);
        self.push(Tensor::new(shape, data).unwrap(), Op::Sigmoid(x), rg)
    }

    fn zip(&mut self, a: Var, b: Var, name: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(Error::dim(name, ta.shape(), tb.shape()));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(ta.shape().to_vec(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip(a, b, "add", |x, y| x + y)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(t, Op::Add(a, b), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip(a, b, "sub", |x, y| x - y)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(t, Op::Sub(a, b), rg))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip(a, b, "mul", |x, y| x * y)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(t, Op::Mul(a, b), rg))
    }

    /// Adds a constant (non-differentiable) tensor of the same size.
    pub fn add_const(&mut self, x: Var, c: &[f64]) -> Result<Var> {
        let t = self.value(x);
        if t.len() != c.len() {
            return Err(Error::dim("add_const", t.shape(), &[c.len()]));
        }
        let data = t.data().iter().zip(c).map(|(&a, &b)| a + b).collect();
        let out = Tensor::new(t.shape().to_vec(), data)?;
        let rg = self.rg(&[x]);
        Ok(self.push(out, Op::AddConst(x), rg))
    }

    /// Row selection `y[i] = x[index[i]]`.
    pub fn gather_rows(&mut self, x: Var, index: &[usize]) -> Result<Var> {
        let (rows, cols) = self.mat(x, "gather_rows")?;
        let src = self.value(x).data();
        let mut out = Vec::with_capacity(index.len() * cols);
        for &i in index {
            if i >= rows {
                return Err(Error::Index {
                    op: "gather_rows",
                    index: i,
                    bound: rows,
                });
            }
            out.extend_from_slice(&src[i * cols..(i + 1) * cols]);
        }
        let rg = self.rg(&[x]);
        let t = Tensor::new(vec![index.len(), cols], out)?;
        Ok(self.push(
            t,
            Op::Gather {
                x,
                index: index.to_vec(),
            },
            rg,
        ))
    }

    /// Per-channel softmax over the rows sharing a group id.
    pub fn group_softmax(&mut self, x: Var, groups: &[usize], num_groups: usize) -> Result<Var> {
        let (n, c) = self.mat(x, "group_softmax")?;
        if groups.len() != n {
            return Err(Error::dim("group_softmax", &[n, c], &[groups.len()]));
        }
        if let Some(&g) = groups.iter().find(|&&g| g >= num_groups) {
            return Err(Error::Index {
                op: "group_softmax",
                index: g,
                bound: num_groups,
            });
        }
        let src = self.value(x).data();
        let mut max = vec![f64::NEG_INFINITY; num_groups * c];
        for (row, &g) in groups.iter().enumerate() {
            for ch in 0..c {
                let m = &mut max[g * c + ch];
                *m = m.max(src[row * c + ch]);
            }
        }
        let mut out = vec![0.0; n * c];
        let mut sum = vec![0.0; num_groups * c];
        for (row, &g) in groups.iter().enumerate() {
            for ch in 0..c {
                let e = (src[row * c + ch] - max[g * c + ch]).exp();
                out[row * c + ch] = e;
                sum[g * c + ch] += e;
            }
        }
        for (row, &g) in groups.iter().enumerate() {
            for ch in 0..c {
                out[row * c + ch] /= sum[g * c + ch];
            }
        }
        let rg = self.rg(&[x]);
        let t = Tensor::new(vec![n, c], out)?;
        Ok(self.push(
            t,
            Op::GroupSoftmax {
                x,
                groups: groups.to_vec(),
                num_groups,
            },
            rg,
        ))
    }

    /// Reduces rows into `num_cells` buckets; empty buckets are zero.
    pub fn scatter_reduce(&mut self, x: Var, cells: &[usize], num_cells: usize, mode: Reduce) -> Result<Var> {
        let (n, c) = self.mat(x, "scatter_reduce")?;
        if cells.len() != n {
            return Err(Error::dim("scatter_reduce", &[n, c], &[cells.len()]));
        }
        let src = self.value(x).data();
        let mut out = vec![0.0; num_cells * c];
        let mut count = vec![0usize; num_cells];
        for (row, &cell) in cells.iter().enumerate() {
            if cell >= num_cells {
                return Err(Error::Index {
                    op: "scatter_reduce",
                    index: cell,
                    bound: num_cells,
                });
            }
            count[cell] += 1;
            for (o, s) in out[cell * c..(cell + 1) * c]
                .iter_mut()
                .zip(&src[row * c..(row + 1) * c])
            {
                *o += s;
            }
        }
        let inv_count = match mode {
            Reduce::Sum => None,
            Reduce::Mean => {
                for (cell, &k) in count.iter().enumerate() {
                    if k > 1 {
                        let kf = k as f64;
                        out[cell * c..(cell + 1) * c].iter_mut().for_each(|v| *v /= kf);
                    }
                }
                Some(
                    count
                        .iter()
                        .map(|&k| if k > 0 { 1.0 / k as f64 } else { 0.0 })
                        .collect(),
                )
            }
        };
        let rg = self.rg(&[x]);
        let t = Tensor::new(vec![num_cells, c], out)?;
        Ok(self.push(
            t,
            Op::Scatter {
                x,
                cells: cells.to_vec(),
                inv_count,
            },
            rg,
        ))
    }

    /// Trilinear sampling of a `res³ × C` grid at points in `[0, 1]³`.
    pub fn grid_interpolate(&mut self, grid: Var, res: usize, points: &[[f64; 3]]) -> Result<Var> {
        let (cells, c) = self.mat(grid, "grid_interpolate")?;
        if cells != res * res * res {
            return Err(Error::dim("grid_interpolate", &[res, res, res], &[cells]));
        }
        let taps = points
            .iter()
            .map(|&p| interp_taps(p, res))
            .collect::<Result<Vec<_>>>()?;
        let src = self.value(grid).data();
        let mut out = vec![0.0; points.len() * c];
        for (row, tap) in out.chunks_exact_mut(c).zip(&taps) {
            for &(cell, w) in tap {
                for (o, s) in row.iter_mut().zip(&src[cell * c..(cell + 1) * c]) {
                    *o += w * s;
                }
            }
        }
        let rg = self.rg(&[grid]);
        let t = Tensor::new(vec![points.len(), c], out)?;
        Ok(self.push(t, Op::Interp { grid, taps }, rg))
    }

    /// 3×3×3 convolution with zero padding; output resolution equals input.
    ///
    /// Full kernels are `[27·Cin × Cout]` (tap-major), depthwise kernels
    /// `[27 × C]`.
    pub fn conv3(&mut self, x: Var, res: usize, w: Var, b: Var, mode: ConvMode) -> Result<Var> {
        self.conv3_impl(x, res, w, b, mode, None)
    }

    /// [`Tape::conv3`] evaluated only at the listed output cells; row `i`
    /// of the result is the convolution at `sites[i]`.
    pub fn conv3_at(&mut self, x: Var, res: usize, w: Var, b: Var, mode: ConvMode, sites: &[usize]) -> Result<Var> {
        let cells = res * res * res;
        if let Some(&bad) = sites.iter().find(|&&c| c >= cells) {
            return Err(Error::Index {
                op: "conv3_at",
                index: bad,
                bound: cells,
            });
        }
        self.conv3_impl(x, res, w, b, mode, Some(sites.to_vec()))
    }

    fn conv3_impl(
        &mut self,
        x: Var,
        res: usize,
        w: Var,
        b: Var,
        mode: ConvMode,
        sites: Option<Vec<usize>>,
    ) -> Result<Var> {
        let (cells, cin) = self.mat(x, "conv3")?;
        if cells != res * res * res {
            return Err(Error::dim("conv3", &[res, res, res], &[cells]));
        }
        let (wr, cout) = self.mat(w, "conv3")?;
        let expected_rows = match mode {
            ConvMode::Full => 27 * cin,
            ConvMode::Depthwise => 27,
        };
        if wr != expected_rows || (mode == ConvMode::Depthwise && cout != cin) {
            return Err(Error::dim("conv3", &[expected_rows, cin], self.value(w).shape()));
        }
        if self.value(b).len() != cout {
            return Err(Error::dim("conv3", &[cout], self.value(b).shape()));
        }
        let rows = sites.as_ref().map_or(cells, Vec::len);
        let input = self.value(x).data();
        let kernel = self.value(w).data();
        let bias = self.value(b).data();
        let mut out = vec![0.0; rows * cout];
        for row in out.chunks_exact_mut(cout) {
            row.copy_from_slice(bias);
        }
        match mode {
            ConvMode::Full => {
                let width = 27 * cin;
                let mut col = vec![0.0; CONV_BLOCK.min(rows) * width];
                for start in (0..rows).step_by(CONV_BLOCK) {
                    let end = (start + CONV_BLOCK).min(rows);
                    let block = site_block(&sites, start, end);
                    im2col(input, res, cin, &block, &mut col);
                    gemm(
                        end - start,
                        width,
                        cout,
                        &col,
                        (width, 1),
                        kernel,
                        (cout, 1),
                        1.0,
                        &mut out[start * cout..end * cout],
                    );
                }
            }
            ConvMode::Depthwise => {
                for r in 0..rows {
                    let cell = sites.as_ref().map_or(r, |s| s[r]);
                    let (cx, cy, cz) = unflatten(res, cell);
                    let dst = &mut out[r * cin..(r + 1) * cin];
                    for k in 0..27 {
                        if let Some(n) = neighbor(res, cx, cy, cz, k) {
                            let src = &input[n * cin..(n + 1) * cin];
                            let kw = &kernel[k * cin..(k + 1) * cin];
                            for ((d, s), w) in dst.iter_mut().zip(src).zip(kw) {
                                *d += s * w;
                            }
                        }
                    }
                }
            }
        }
        let rg = self.rg(&[x, w, b]);
        let t = Tensor::new(vec![rows, cout], out)?;
        Ok(self.push(
            t,
            Op::Conv {
                x,
                w,
                b,
                res,
                mode,
                sites,
            },
            rg,
        ))
    }

    /// Halves (average pooling) or doubles (nearest repetition) the resolution.
    pub fn resample_grid(&mut self, x: Var, res: usize, factor: Resample) -> Result<Var> {
        let (cells, c) = self.mat(x, "resample_grid")?;
        if cells != res * res * res {
            return Err(Error::dim("resample_grid", &[res, res, res], &[cells]));
        }
        let src = self.value(x).data();
        let out = match factor {
            Resample::Down2 => {
                if !res.is_multiple_of(2) {
                    return Err(Error::dim("resample_grid", &[res], &[2]));
                }
                let r2 = res / 2;
                let mut out = vec![0.0; r2 * r2 * r2 * c];
                for cell in 0..cells {
                    let (x0, y0, z0) = unflatten(res, cell);
                    let parent = ((x0 / 2) * r2 + y0 / 2) * r2 + z0 / 2;
                    for (o, s) in out[parent * c..(parent + 1) * c]
                        .iter_mut()
                        .zip(&src[cell * c..(cell + 1) * c])
                    {
                        *o += s;
                    }
                }
                out.iter_mut().for_each(|v| *v *= 0.125);
                Tensor::new(vec![r2 * r2 * r2, c], out)?
            }
            Resample::Up2 => {
                let r2 = res * 2;
                let mut out = Vec::with_capacity(r2 * r2 * r2 * c);
                for cell in 0..r2 * r2 * r2 {
                    let (x0, y0, z0) = unflatten(r2, cell);
                    let parent = ((x0 / 2) * res + y0 / 2) * res + z0 / 2;
                    out.extend_from_slice(&src[parent * c..(parent + 1) * c]);
                }
                Tensor::new(vec![r2 * r2 * r2, c], out)?
            }
        };
        let rg = self.rg(&[x]);
        Ok(self.push(out, Op::Resample { x, res, factor }, rg))
    }

    /// Column-wise concatenation of matrices with equal row counts.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let dims = parts
            .iter()
            .map(|&p| self.mat(p, "concat_cols"))
            .collect::<Result<Vec<_>>>()?;
        let n = dims.first().map_or(0, |d| d.0);
        if let Some(d) = dims.iter().find(|d| d.0 != n) {
            return Err(Error::dim("concat_cols", &[n], &[d.0]));
        }
        let total: usize = dims.iter().map(|d| d.1).sum();
        let mut out = Vec::with_capacity(n * total);
        for row in 0..n {
            for (&p, &(_, c)) in parts.iter().zip(&dims) {
                out.extend_from_slice(&self.value(p).data()[row * c..(row + 1) * c]);
            }
        }
        let rg = self.rg(parts);
        let t = Tensor::new(vec![n, total], out)?;
        Ok(self.push(t, Op::Concat(parts.to_vec()), rg))
    }

    /// Repeats an `N×1` column `cols` times.
    pub fn broadcast_cols(&mut self, x: Var, cols: usize) -> Result<Var> {
        let (n, c) = self.mat(x, "broadcast_cols")?;
        if c != 1 {
            return Err(Error::dim("broadcast_cols", &[n, c], &[n, 1]));
        }
        let data = self
            .value(x)
            .data()
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, cols))
            .collect();
        let rg = self.rg(&[x]);
        let t = Tensor::new(vec![n, cols], data)?;
        Ok(self.push(t, Op::Broadcast { x }, rg))
    }

    /// Mean binary cross-entropy of probabilities against 0/1 labels.
    /// Probabilities are clamped to `[1e-7, 1 - 1e-7]` before the log.
    pub fn bce(&mut self, p: Var, labels: &[f64]) -> Result<Var> {
        let t = self.value(p);
        if t.len() != labels.len() || labels.is_empty() {
            return Err(Error::dim("bce", t.shape(), &[labels.len()]));
        }
        if let Some(l) = labels.iter().find(|&&l| l != 0.0 && l != 1.0) {
            return Err(Error::Contract(format!("bce: label {l} is not 0 or 1")));
        }
        let mut acc = 0.0;
        for (&pv, &l) in t.data().iter().zip(labels) {
            let pc = pv.clamp(BCE_EPS, 1.0 - BCE_EPS);
            acc -= l * pc.ln() + (1.0 - l) * (1.0 - pc).ln();
        }
        let loss = acc / labels.len() as f64;
        let rg = self.rg(&[p]);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::Bce {
                p,
                labels: labels.to_vec(),
            },
            rg,
        ))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        let rg = self.rg(&[x]);
        self.push(Tensor::scalar(s), Op::Sum(x), rg)
    }

    pub fn mean(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let s = t.data().iter().sum::<f64>() / t.len().max(1) as f64;
        let rg = self.rg(&[x]);
        self.push(Tensor::scalar(s), Op::Mean(x), rg)
    }

    // ---------------------------------------------------------- backward

    /// Reverse-mode sweep from a scalar output, in exact reverse execution
    /// order. Leaf gradients add into any left over from earlier sweeps;
    /// intermediate gradients restart from zero.
    pub fn backward(&mut self, out: Var) -> Result<()> {
        if self.value(out).len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar output, got shape {:?}",
                self.value(out).shape()
            )));
        }
        for (node, g) in self.nodes.iter().zip(self.grads.iter_mut()) {
            if !matches!(node.op, Op::Leaf) {
                *g = None;
            }
        }
        self.grads[out.0] = Some(vec![1.0]);
        for i in (0..=out.0).rev() {
            if !self.nodes[i].requires_grad {
                continue;
            }
            let Some(g) = self.grads[i].take() else {
                continue;
            };
            let scale = self.nodes[i].op.primitive().map_or(1.0, fault_scale);
            if scale == 1.0 {
                self.backprop(i, &g);
            } else {
                let scaled: Vec<f64> = g.iter().map(|v| v * scale).collect();
                self.backprop(i, &scaled);
            }
            self.grads[i] = Some(g);
        }
        Ok(())
    }

    fn backprop(&mut self, i: usize, g: &[f64]) {
        let nodes = &self.nodes;
        let grads = &mut self.grads;
        macro_rules! with_acc {
            ($v:expr, |$buf:ident| $body:expr) => {
                if let Some($buf) = accumulator(nodes, grads, $v) {
                    $body;
                }
            };
        }
        let val = |v: Var| nodes[v.0].value.data();
        let node = &nodes[i];
        match &node.op {
            Op::Leaf => {}
            Op::Linear { x, w, b } => {
                let (n, cin) = nodes[x.0].value.dims2().unwrap();
                let cout = nodes[w.0].value.dims2().unwrap().1;
                with_acc!(*x, |dx| {
                    gemm(n, cout, cin, g, (cout, 1), val(*w), (1, cout), 1.0, dx);
                });
                with_acc!(*w, |dw| {
                    gemm(cin, n, cout, val(*x), (1, cin), g, (cout, 1), 1.0, dw);
                });
                with_acc!(*b, |db| {
                    for row in g.chunks_exact(cout) {
                        for (d, v) in db.iter_mut().zip(row) {
                            *d += v;
                        }
                    }
                });
            }
            Op::Relu(x) => with_acc!(*x, |dx| {
                for ((d, &xv), &gv) in dx.iter_mut().zip(val(*x)).zip(g) {
                    if xv > 0.0 {
                        *d += gv;
                    }
                }
            }),
            Op::Sigmoid(x) => with_acc!(*x, |dx| {
                for ((d, &y), &gv) in dx.iter_mut().zip(node.value.data()).zip(g) {
                    *d += gv * y * (1.0 - y);
                }
            }),
            Op::Add(a, b) => {
                with_acc!(*a, |da| add_into(da, g));
                with_acc!(*b, |db| add_into(db, g));
            }
            Op::Sub(a, b) => {
                with_acc!(*a, |da| add_into(da, g));
                with_acc!(*b, |db| {
                    for (d, v) in db.iter_mut().zip(g) {
                        *d -= v;
                    }
                });
            }
            Op::Mul(a, b) => {
                with_acc!(*a, |da| {
                    for ((d, &bv), &gv) in da.iter_mut().zip(val(*b)).zip(g) {
                        *d += gv * bv;
                    }
                });
                with_acc!(*b, |db| {
                    for ((d, &av), &gv) in db.iter_mut().zip(val(*a)).zip(g) {
                        *d += gv * av;
                    }
                });
            }
            Op::AddConst(x) => with_acc!(*x, |dx| add_into(dx, g)),
            Op::Gather { x, index } => with_acc!(*x, |dx| {
                let c = node.value.dims2().unwrap().1;
                for (row, &src) in index.iter().enumerate() {
                    add_into(&mut dx[src * c..(src + 1) * c], &g[row * c..(row + 1) * c]);
                }
            }),
            Op::GroupSoftmax { x, groups, num_groups } => with_acc!(*x, |dx| {
                let c = node.value.dims2().unwrap().1;
                let y = node.value.data();
                let mut dot = vec![0.0; num_groups * c];
                for (row, &grp) in groups.iter().enumerate() {
                    for ch in 0..c {
                        dot[grp * c + ch] += y[row * c + ch] * g[row * c + ch];
                    }
                }
                for (row, &grp) in groups.iter().enumerate() {
                    for ch in 0..c {
                        let k = row * c + ch;
                        dx[k] += y[k] * (g[k] - dot[grp * c + ch]);
                    }
                }
            }),
            Op::Scatter { x, cells, inv_count } => with_acc!(*x, |dx| {
                let c = node.value.dims2().unwrap().1;
                for (row, &cell) in cells.iter().enumerate() {
                    let s = inv_count.as_ref().map_or(1.0, |ic| ic[cell]);
                    for (d, v) in dx[row * c..(row + 1) * c].iter_mut().zip(&g[cell * c..(cell + 1) * c]) {
                        *d += s * v;
                    }
                }
            }),
            Op::Interp { grid, taps } => with_acc!(*grid, |dg| {
                let c = node.value.dims2().unwrap().1;
                for (row, tap) in taps.iter().enumerate() {
                    let gr = &g[row * c..(row + 1) * c];
                    for &(cell, w) in tap {
                        for (d, v) in dg[cell * c..(cell + 1) * c].iter_mut().zip(gr) {
                            *d += w * v;
                        }
                    }
                }
            }),
            Op::Conv {
                x,
                w,
                b,
                res,
                mode,
                sites,
            } => {
                let res = *res;
                let cin = nodes[x.0].value.dims2().unwrap().1;
                let (rows, cout) = node.value.dims2().unwrap();
                with_acc!(*b, |db| {
                    for row in g.chunks_exact(cout) {
                        add_into(db, row);
                    }
                });
                let input = val(*x);
                let kernel = val(*w);
                match mode {
                    ConvMode::Full => {
                        let width = 27 * cin;
                        let mut col = vec![0.0; CONV_BLOCK.min(rows) * width];
                        for start in (0..rows).step_by(CONV_BLOCK) {
                            let end = (start + CONV_BLOCK).min(rows);
                            let n = end - start;
                            let block = site_block(sites, start, end);
                            let gb = &g[start * cout..end * cout];
                            with_acc!(*w, |dw| {
                                im2col(input, res, cin, &block, &mut col);
                                gemm(width, n, cout, &col, (1, width), gb, (cout, 1), 1.0, dw);
                            });
                            with_acc!(*x, |dx| {
                                gemm(n, cout, width, gb, (cout, 1), kernel, (1, cout), 0.0, &mut col);
                                col2im(&col, res, cin, &block, dx);
                            });
                        }
                    }
                    ConvMode::Depthwise => {
                        let site = |r: usize| sites.as_ref().map_or(r, |s| s[r]);
                        with_acc!(*w, |dw| {
                            for r in 0..rows {
                                let (cx, cy, cz) = unflatten(res, site(r));
                                let gr = &g[r * cin..(r + 1) * cin];
                                for k in 0..27 {
                                    if let Some(n) = neighbor(res, cx, cy, cz, k) {
                                        let src = &input[n * cin..(n + 1) * cin];
                                        for ((d, s), gv) in dw[k * cin..(k + 1) * cin].iter_mut().zip(src).zip(gr) {
                                            *d += s * gv;
                                        }
                                    }
                                }
                            }
                        });
                        with_acc!(*x, |dx| {
                            for r in 0..rows {
                                let (cx, cy, cz) = unflatten(res, site(r));
                                let gr = &g[r * cin..(r + 1) * cin];
                                for k in 0..27 {
                                    if let Some(n) = neighbor(res, cx, cy, cz, k) {
                                        let kw = &kernel[k * cin..(k + 1) * cin];
                                        for ((d, w), gv) in dx[n * cin..(n + 1) * cin].iter_mut().zip(kw).zip(gr) {
                                            *d += w * gv;
                                        }
                                    }
                                }
                            }
                        });
                    }
                }
            }
            Op::Resample { x, res, factor } => with_acc!(*x, |dx| {
                let res = *res;
                let c = node.value.dims2().unwrap().1;
                match factor {
                    Resample::Down2 => {
                        let r2 = res / 2;
                        for cell in 0..res * res * res {
                            let (x0, y0, z0) = unflatten(res, cell);
                            let parent = ((x0 / 2) * r2 + y0 / 2) * r2 + z0 / 2;
                            for (d, v) in dx[cell * c..(cell + 1) * c]
                                .iter_mut()
                                .zip(&g[parent * c..(parent + 1) * c])
                            {
                                *d += 0.125 * v;
                            }
                        }
                    }
                    Resample::Up2 => {
                        let r2 = res * 2;
                        for cell in 0..r2 * r2 * r2 {
                            let (x0, y0, z0) = unflatten(r2, cell);
                            let parent = ((x0 / 2) * res + y0 / 2) * res + z0 / 2;
                            add_into(&mut dx[parent * c..(parent + 1) * c], &g[cell * c..(cell + 1) * c]);
                        }
                    }
                }
            }),
            Op::Concat(parts) => {
                let total = node.value.dims2().unwrap().1;
                let mut offset = 0;
                for &p in parts {
                    let (n, c) = nodes[p.0].value.dims2().unwrap();
                    with_acc!(p, |dp| {
                        for row in 0..n {
                            add_into(
                                &mut dp[row * c..(row + 1) * c],
                                &g[row * total + offset..row * total + offset + c],
                            );
                        }
                    });
                    offset += c;
                }
            }
            Op::Broadcast { x } => with_acc!(*x, |dx| {
                let cols = node.value.dims2().unwrap().1;
                for (d, row) in dx.iter_mut().zip(g.chunks_exact(cols)) {
                    *d += row.iter().sum::<f64>();
                }
            }),
            Op::Bce { p, labels } => with_acc!(*p, |dp| {
                let scale = g[0] / labels.len() as f64;
                for ((d, &pv), &l) in dp.iter_mut().zip(val(*p)).zip(labels) {
                    if (BCE_EPS..=1.0 - BCE_EPS).contains(&pv) {
                        *d += scale * (-l / pv + (1.0 - l) / (1.0 - pv));
                    }
                }
            }),
            Op::Sum(x) => with_acc!(*x, |dx| dx.iter_mut().for_each(|d| *d += g[0])),
            Op::Mean(x) => with_acc!(*x, |dx| {
                let s = g[0] / dx.len() as f64;
                dx.iter_mut().for_each(|d| *d += s);
            }),
        }
    }
}

pub(crate) const BCE_EPS: f64 = 1e-7;

fn accumulator<'a>(nodes: &[Node], grads: &'a mut [Option<Vec<f64>>], v: Var) -> Option<&'a mut Vec<f64>> {
    if !nodes[v.0].requires_grad {
        return None;
    }
    let len = nodes[v.0].value.len();
    Some(grads[v.0].get_or_insert_with(|| vec![0.0; len]))
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
