//! Dense numeric kernels shared by the forward and backward passes.

use crate::error::{Error, Result};

/// `c = beta * c + a · b` for row-major strided operands.
///
/// `a` is `m × k` with strides `(rsa, csa)`, `b` is `k × n` with strides
/// `(rsb, csb)`, `c` is a contiguous row-major `m × n` block.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for v in c[..m * n].iter_mut() {
            *v *= beta;
        }
        return;
    }
    assert!((m - 1) * rsa + (k - 1) * csa < a.len(), "gemm: lhs too short");
    assert!((k - 1) * rsb + (n - 1) * csb < b.len(), "gemm: rhs too short");
    assert!(m * n <= c.len(), "gemm: output too short");
    // SAFETY: the assertions above bound every index the kernel touches.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Offsets of the 3×3×3 stencil; kernel tap `k` is `(dx+1)*9 + (dy+1)*3 + (dz+1)`.
pub(crate) const STENCIL: [(isize, isize, isize); 27] = {
    let mut out = [(0, 0, 0); 27];
    let mut k = 0;
    while k < 27 {
        out[k] = ((k / 9) as isize - 1, ((k / 3) % 3) as isize - 1, (k % 3) as isize - 1);
        k += 1;
    }
    out
};

/// Neighbour cell of `cell` under stencil tap `k`, or `None` past the border.
#[inline]
pub(crate) fn neighbor(res: usize, x: usize, y: usize, z: usize, k: usize) -> Option<usize> {
    let (dx, dy, dz) = STENCIL[k];
    let nx = x as isize + dx;
    let ny = y as isize + dy;
    let nz = z as isize + dz;
    let r = res as isize;
    if nx < 0 || ny < 0 || nz < 0 || nx >= r || ny >= r || nz >= r {
        return None;
    }
    Some(((nx * r + ny) * r + nz) as usize)
}

#[inline]
pub(crate) fn unflatten(res: usize, cell: usize) -> (usize, usize, usize) {
    (cell / (res * res), (cell / res) % res, cell % res)
}

/// Rows per im2col block; bounds scratch memory for large grids.
pub(crate) const CONV_BLOCK: usize = 2048;

/// Fills `col` (`sites.len() × 27·cin`) with zero-padded neighbourhoods.
pub(crate) fn im2col(input: &[f64], res: usize, cin: usize, sites: &[usize], col: &mut [f64]) {
    let width = 27 * cin;
    for (r, &cell) in sites.iter().enumerate() {
        let (x, y, z) = unflatten(res, cell);
        let row = &mut col[r * width..(r + 1) * width];
        for k in 0..27 {
            let dst = &mut row[k * cin..(k + 1) * cin];
            match neighbor(res, x, y, z, k) {
                Some(n) => dst.copy_from_slice(&input[n * cin..(n + 1) * cin]),
                None => dst.fill(0.0),
            }
        }
    }
}

/// Scatter-adds an im2col gradient block back onto the input gradient.
pub(crate) fn col2im(dcol: &[f64], res: usize, cin: usize, sites: &[usize], dinput: &mut [f64]) {
    let width = 27 * cin;
    for (r, &cell) in sites.iter().enumerate() {
        let (x, y, z) = unflatten(res, cell);
        let row = &dcol[r * width..(r + 1) * width];
        for k in 0..27 {
            if let Some(n) = neighbor(res, x, y, z, k) {
                let dst = &mut dinput[n * cin..(n + 1) * cin];
                for (d, s) in dst.iter_mut().zip(&row[k * cin..(k + 1) * cin]) {
                    *d += s;
                }
            }
        }
    }
}

/// Trilinear taps over cell-centre features: eight `(cell, weight)` pairs.
///
/// Centres sit at `(i + 0.5) / res`; queries beyond the outermost centres
/// clamp to them. Weights are non-negative and sum to one.
pub(crate) fn interp_taps(p: [f64; 3], res: usize) -> Result<[(usize, f64); 8]> {
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    let mut t = [0.0f64; 3];
    for axis in 0..3 {
        let c = p[axis];
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Domain(format!(
                "interpolation point {c} outside [0, 1] on axis {axis}"
            )));
        }
        if res == 1 {
            continue;
        }
        let u = (c * res as f64 - 0.5).clamp(0.0, (res - 1) as f64);
        let i0 = (u.floor() as usize).min(res - 2);
        lo[axis] = i0;
        hi[axis] = i0 + 1;
        t[axis] = u - i0 as f64;
    }
    let mut taps = [(0usize, 0.0f64); 8];
    let mut n = 0;
    for a in 0..2 {
        let (ix, wx) = if a == 0 { (lo[0], 1.0 - t[0]) } else { (hi[0], t[0]) };
        for b in 0..2 {
            let (iy, wy) = if b == 0 { (lo[1], 1.0 - t[1]) } else { (hi[1], t[1]) };
            for c in 0..2 {
                let (iz, wz) = if c == 0 { (lo[2], 1.0 - t[2]) } else { (hi[2], t[2]) };
                taps[n] = ((ix * res + iy) * res + iz, wx * wy * wz);
                n += 1;
            }
        }
    }
    Ok(taps)
}

#[inline]
pub(crate) fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
