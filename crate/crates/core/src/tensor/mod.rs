//! Minimal deterministic reverse-mode differentiation.
//!
//! Values live in row-major [`Tensor`]s. Operations are recorded on a
//! [`Tape`] as they execute; [`Tape::backward`] replays them in reverse
//! and accumulates gradients. Every reduction runs in ascending row order,
//! so results are bitwise reproducible for a fixed input ordering.
//!
//! Feature grids are stored cell-major as `[res³ × C]` matrices with the
//! flattened cell index `(x * res + y) * res + z`.

pub(crate) mod gradcheck;
pub(crate) mod kernels;
mod tape;

pub use gradcheck::{gradcheck, primitive_suite, GradcheckReport};
pub use tape::{set_backward_fault, ConvMode, Primitive, Reduce, Resample, Tape, Var};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    requires_grad: bool,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::dim("tensor", &shape, &[data.len()]));
        }
        Ok(Self {
            shape,
            data,
            requires_grad: false,
            grad: None,
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; len],
            requires_grad: false,
            grad: None,
        }
    }

    pub fn full(shape: Vec<usize>, value: f64) -> Self {
        let mut t = Self::zeros(shape);
        t.data.fill(value);
        t
    }

    /// A 2-D tensor from equally sized rows.
    pub fn from_rows<const C: usize>(rows: &[[f64; C]]) -> Self {
        Self {
            shape: vec![rows.len(), C],
            data: rows.iter().flatten().copied().collect(),
            requires_grad: false,
            grad: None,
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
            requires_grad: false,
            grad: None,
        }
    }

    /// Marks the tensor as a differentiable leaf and allocates its gradient.
    pub fn requires_grad(mut self, flag: bool) -> Self {
        self.set_requires_grad(flag);
        self
    }

    pub fn set_requires_grad(&mut self, flag: bool) {
        self.requires_grad = flag;
        self.grad = flag.then(|| vec![0.0; self.data.len()]);
    }

    pub fn is_requires_grad(&self) -> bool {
        self.requires_grad
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    pub fn grad_mut(&mut self) -> Option<&mut [f64]> {
        self.grad.as_deref_mut()
    }

    /// Adds `g` into the gradient accumulator.
    pub fn accumulate_grad(&mut self, g: &[f64]) -> Result<()> {
        let Some(acc) = self.grad.as_mut() else {
            return Err(Error::Contract(
                "accumulate_grad on a tensor without requires_grad".into(),
            ));
        };
        if acc.len() != g.len() {
            return Err(Error::dim("accumulate_grad", &self.shape, &[g.len()]));
        }
        for (a, b) in acc.iter_mut().zip(g) {
            *a += b;
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = self.grad.as_mut() {
            g.fill(0.0);
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Rows and columns of a 2-D tensor.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(Error::Contract(format!(
                "expected a 2-D tensor, got shape {:?}",
                self.shape
            ))),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let cols = self.shape.last().copied().unwrap_or(1);
        &self.data[i * cols..(i + 1) * cols]
    }

    /// Value-only copy (drops any gradient state).
    pub fn detached(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.clone(),
            requires_grad: false,
            grad: None,
        }
    }
}

/// A dense `C`-channel lattice of `res³` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    res: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(res: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if res == 0 || channels == 0 || data.len() != res * res * res * channels {
            return Err(Error::dim("feature_grid", &[res, res, res, channels], &[data.len()]));
        }
        Ok(Self { res, channels, data })
    }

    pub fn constant(res: usize, channels: usize, value: f64) -> Self {
        Self {
            res,
            channels,
            data: vec![value; res * res * res * channels],
        }
    }

    /// Fills each cell from its center coordinate `((i + 0.5) / res, ...)`.
    pub fn from_fn(res: usize, channels: usize, f: impl Fn([f64; 3], usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(res * res * res * channels);
        let h = 1.0 / res as f64;
        for x in 0..res {
            for y in 0..res {
                for z in 0..res {
                    let c = [(x as f64 + 0.5) * h, (y as f64 + 0.5) * h, (z as f64 + 0.5) * h];
                    data.extend((0..channels).map(|ch| f(c, ch)));
                }
            }
        }
        Self { res, channels, data }
    }

    pub fn res(&self) -> usize {
        self.res
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn num_cells(&self) -> usize {
        self.res * self.res * self.res
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn cell(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.channels..(idx + 1) * self.channels]
    }

    pub fn cell_index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.res + y) * self.res + z
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor {
            shape: vec![self.num_cells(), self.channels],
            data: self.data.clone(),
            requires_grad: false,
            grad: None,
        }
    }

    pub fn from_tensor(res: usize, t: &Tensor) -> Result<Self> {
        let (rows, cols) = t.dims2()?;
        if rows != res * res * res {
            return Err(Error::dim("feature_grid", &[res * res * res], &[rows]));
        }
        Self::new(res, cols, t.data.clone())
    }
}

/// Flattened index of the cell containing `p` at resolution `res`.
///
/// A coordinate of exactly 1.0 folds into the last cell.
pub fn cell_of(p: [f64; 3], res: usize) -> Result<usize> {
    let mut idx = [0usize; 3];
    for (axis, &c) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Domain(format!("coordinate {c} outside [0, 1] on axis {axis}")));
        }
        idx[axis] = axis_cell(c, res);
    }
    Ok((idx[0] * res + idx[1]) * res + idx[2])
}

/// Cell `i` along one axis with `i/res ≤ c < (i+1)/res` as evaluated in
/// floating point (so the local offset `c − i/res` is never negative);
/// `c = 1.0` folds into the last cell.
pub fn axis_cell(c: f64, res: usize) -> usize {
    let r = res as f64;
    let mut i = ((c * r).floor().max(0.0) as usize).min(res - 1);
    if i > 0 && i as f64 / r > c {
        i -= 1;
    } else if i + 1 < res && (i + 1) as f64 / r <= c {
        i += 1;
    }
    i
}
