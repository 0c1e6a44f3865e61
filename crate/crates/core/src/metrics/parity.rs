use crate::error::{Error, Result};
use crate::meshing::Mesh;

/// Point-in-mesh test by the parity of crossings of a `+x` ray.
///
/// Triangles are binned by their projection onto the yz-plane. A ray through
/// an edge or vertex is resolved by nudging the query by a fixed
/// infinitesimal `(ε, ε²)` in yz, evaluated symbolically, so every crossing
/// is counted exactly once on a closed mesh.
#[derive(Debug, Clone)]
pub struct InsideTest {
    tris: Vec<[[f64; 3]; 3]>,
    lo: [f64; 3],
    hi: [f64; 3],
    bins: usize,
    bin_size: [f64; 2],
    start: Vec<usize>,
    items: Vec<usize>,
}

/// Signed side of `p` relative to the line through `u` and `v` in yz,
/// with endpoints in canonical order so that both triangles sharing the
/// edge see the same value, plus the symbolic tie-break for zero.
fn edge_sign(u: [f64; 2], v: [f64; 2], p: [f64; 2]) -> (f64, f64) {
    let (s, t, sign) = if (u[0], u[1]) <= (v[0], v[1]) {
        (u, v, 1.0)
    } else {
        (v, u, -1.0)
    };
    let e = (t[0] - s[0]) * (p[1] - s[1]) - (t[1] - s[1]) * (p[0] - s[0]);
    if e != 0.0 {
        return (sign * e, sign * e);
    }
    // nudge p by (ε, ε²): first-order term −(t_z − s_z), then (t_y − s_y)
    let first = -(t[1] - s[1]);
    let tie = if first != 0.0 { first } else { t[0] - s[0] };
    (0.0, sign * tie)
}

impl InsideTest {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        mesh.validate()?;
        if mesh.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let tris: Vec<[[f64; 3]; 3]> = mesh.triangles.iter().map(|t| t.map(|i| mesh.vertices[i])).collect();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in tris.iter().flatten() {
            for d in 0..3 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let bins = ((tris.len() as f64).sqrt().ceil() as usize).clamp(1, 1024);
        let bin_size = [1, 2].map(|d| ((hi[d] - lo[d]) / bins as f64).max(f64::MIN_POSITIVE));
        let mut test = Self {
            tris,
            lo,
            hi,
            bins,
            bin_size,
            start: Vec::new(),
            items: Vec::new(),
        };
        let ranges: Vec<[(usize, usize); 2]> = test
            .tris
            .iter()
            .map(|t| {
                [0, 1].map(|k| {
                    let d = k + 1;
                    let a = t.iter().map(|v| v[d]).fold(f64::INFINITY, f64::min);
                    let b = t.iter().map(|v| v[d]).fold(f64::NEG_INFINITY, f64::max);
                    (test.bin(k, a), test.bin(k, b))
                })
            })
            .collect();
        let mut count = vec![0usize; bins * bins + 1];
        for r in &ranges {
            for y in r[0].0..=r[0].1 {
                for z in r[1].0..=r[1].1 {
                    count[y * bins + z + 1] += 1;
                }
            }
        }
        for b in 0..bins * bins {
            count[b + 1] += count[b];
        }
        let mut fill = count.clone();
        let mut items = vec![0; count[bins * bins]];
        for (t, r) in ranges.iter().enumerate() {
            for y in r[0].0..=r[0].1 {
                for z in r[1].0..=r[1].1 {
                    let b = y * bins + z;
                    items[fill[b]] = t;
                    fill[b] += 1;
                }
            }
        }
        test.start = count;
        test.items = items;
        Ok(test)
    }

    fn bin(&self, k: usize, v: f64) -> usize {
        let c = ((v - self.lo[k + 1]) / self.bin_size[k]).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.bins - 1)
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        if (0..3).any(|d| p[d] < self.lo[d] || p[d] > self.hi[d]) {
            return false;
        }
        let b = self.bin(0, p[1]) * self.bins + self.bin(1, p[2]);
        let q = [p[1], p[2]];
        let mut crossings = 0usize;
        for &t in &self.items[self.start[b]..self.start[b + 1]] {
            let tri = &self.tris[t];
            let v = tri.map(|v| [v[1], v[2]]);
            let area = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]);
            if area == 0.0 {
                continue;
            }
            let e = [
                edge_sign(v[1], v[2], q),
                edge_sign(v[2], v[0], q),
                edge_sign(v[0], v[1], q),
            ];
            let positive = area > 0.0;
            if !e.iter().all(|&(_, s)| (s > 0.0) == positive && s != 0.0) {
                continue;
            }
            let w = [e[0].0 / area, e[1].0 / area, e[2].0 / area];
            let x = w[0] * tri[0][0] + w[1] * tri[1][0] + w[2] * tri[2][0];
            if x > p[0] {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }
}
