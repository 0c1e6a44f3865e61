//! Isosurface extraction: marching cubes over a sampled lattice and the
//! coarse-to-fine variant that only refines cells straddling the threshold.
//!
//! Lattice samples sit at `i / res` for `i` in `0..=res`, unlike feature
//! grids, whose samples are cell centres.

use std::collections::HashMap;

use crate::error::{Error, Result};

mod obj;
mod tables;

use tables::{EDGE_CORNERS, TRI_TABLE};

/// Corner `c` of a cell sits at offset `CORNER_OFFSETS[c]`.
const CORNER_OFFSETS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Field samples on the `(res + 1)³` vertices of a `res³`-cell lattice,
/// x-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    res: usize,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(res: usize, values: Vec<f64>) -> Result<Self> {
        if res == 0 {
            return Err(Error::Contract("lattice needs at least one cell".into()));
        }
        let n = res + 1;
        if values.len() != n * n * n {
            return Err(Error::dim("scalar grid", &[n, n, n], &[values.len()]));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("scalar grid value {v} is not finite")));
        }
        Ok(Self { res, values })
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn(res: usize, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let n = res + 1;
        let mut values = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    values.push(f(lattice_point(res, [i, j, k])));
                }
            }
        }
        Self::new(res, values)
    }

    /// Cells per axis.
    pub fn res(&self) -> usize {
        self.res
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self, [i, j, k]: [usize; 3]) -> usize {
        let n = self.res + 1;
        (i * n + j) * n + k
    }

    pub fn value(&self, ijk: [usize; 3]) -> f64 {
        self.values[self.index(ijk)]
    }

    pub fn point(&self, ijk: [usize; 3]) -> [f64; 3] {
        lattice_point(self.res, ijk)
    }
}

fn lattice_point(res: usize, ijk: [usize; 3]) -> [f64; 3] {
    ijk.map(|i| i as f64 / res as f64)
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    /// Unit area-weighted vertex normals; empty when not computed.
    pub normals: Vec<[f64; 3]>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

impl Mesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.vertices.len();
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= v)) {
            return Err(Error::Index {
                op: "mesh triangle",
                index: t.iter().copied().max().unwrap_or(0),
                bound: v,
            });
        }
        if !self.normals.is_empty() && self.normals.len() != v {
            return Err(Error::dim("mesh normals", &[v, 3], &[self.normals.len(), 3]));
        }
        Ok(())
    }

    /// Cross product of the triangle's edges: direction is the face normal,
    /// length twice its area.
    pub fn face_cross(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        cross(sub(b, a), sub(c, a))
    }

    pub fn face_area(&self, t: usize) -> f64 {
        0.5 * norm(self.face_cross(t))
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.face_area(t)).sum()
    }

    /// Volume enclosed by a closed mesh; positive when faces wind outward.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    /// Area-weighted average of incident face normals, normalized.
    pub fn compute_normals(&mut self) {
        let mut acc = vec![[0.0; 3]; self.vertices.len()];
        for t in 0..self.triangles.len() {
            let n = self.face_cross(t);
            for &i in &self.triangles[t] {
                for a in 0..3 {
                    acc[i][a] += n[a];
                }
            }
        }
        self.normals = acc
            .into_iter()
            .map(|n| {
                let l = norm(n);
                if l > 0.0 {
                    n.map(|c| c / l)
                } else {
                    n
                }
            })
            .collect();
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        self.directed_edges()
            .keys()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect::<std::collections::HashSet<_>>()
            .len()
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    fn directed_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::with_capacity(3 * self.triangles.len());
        for t in &self.triangles {
            for e in 0..3 {
                *m.entry((t[e], t[(e + 1) % 3])).or_insert(0) += 1;
            }
        }
        m
    }

    /// Every edge borders exactly two consistently oriented triangles and
    /// every vertex is surrounded by a single fan of triangles.
    pub fn is_closed_manifold(&self) -> bool {
        let directed = self.directed_edges();
        if directed
            .iter()
            .any(|(&(a, b), &n)| n != 1 || directed.get(&(b, a)) != Some(&1))
        {
            return false;
        }
        // around each vertex, the "next" map b -> c over triangles (v, b, c)
        // must form one cycle
        let mut fans: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.vertices.len()];
        for t in &self.triangles {
            for e in 0..3 {
                fans[t[e]].push((t[(e + 1) % 3], t[(e + 2) % 3]));
            }
        }
        fans.iter().all(|fan| {
            if fan.is_empty() {
                return false;
            }
            let next: HashMap<usize, usize> = fan.iter().copied().collect();
            let start = fan[0].0;
            let (mut cur, mut steps) = (start, 0);
            loop {
                cur = next[&cur];
                steps += 1;
                if cur == start || steps > fan.len() {
                    break;
                }
            }
            cur == start && steps == fan.len()
        })
    }
}

/// Weld key of a crossing: a lattice edge, or a lattice point when the
/// crossing lands exactly on one.
fn edge_key(point: usize, axis: usize) -> u64 {
    (point as u64) << 2 | axis as u64
}

/// Marching cubes with linear edge interpolation.
///
/// A lattice point is inside when its value is `≥ tau`. Faces wind so that
/// normals point towards lower values.
pub fn marching_cubes(sg: &ScalarGrid, tau: f64) -> Result<Mesh> {
    if !tau.is_finite() {
        return Err(Error::Domain(format!("threshold {tau} is not finite")));
    }
    let res = sg.res;
    let mut mesh = Mesh::default();
    let mut welded: HashMap<u64, usize> = HashMap::new();
    let mut vertex = |a: [usize; 3], b: [usize; 3], mesh: &mut Mesh| -> usize {
        // a is the lower lattice endpoint
        let (va, vb) = (sg.value(a), sg.value(b));
        let t = (tau - va) / (vb - va);
        let axis = (0..3).find(|&d| a[d] != b[d]).expect("edge has an axis");
        let (key, pos) = if t <= 0.0 {
            (edge_key(sg.index(a), 3), sg.point(a))
        } else if t >= 1.0 {
            (edge_key(sg.index(b), 3), sg.point(b))
        } else {
            let (pa, pb) = (sg.point(a), sg.point(b));
            let mut p = pa;
            p[axis] = pa[axis] + t * (pb[axis] - pa[axis]);
            (edge_key(sg.index(a), axis), p)
        };
        *welded.entry(key).or_insert_with(|| {
            mesh.vertices.push(pos);
            mesh.vertices.len() - 1
        })
    };
    for i in 0..res {
        for j in 0..res {
            for k in 0..res {
                let corner = |c: usize| {
                    let o = CORNER_OFFSETS[c];
                    [i + o[0], j + o[1], k + o[2]]
                };
                let mut case = 0usize;
                for c in 0..8 {
                    if sg.value(corner(c)) >= tau {
                        case |= 1 << c;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let row = &TRI_TABLE[case];
                for tri in row.chunks_exact(3).take_while(|t| t[0] >= 0) {
                    let ids = [0, 1, 2].map(|n| {
                        let (c0, c1) = EDGE_CORNERS[tri[n] as usize];
                        let (p, q) = (corner(c0), corner(c1));
                        if p <= q {
                            vertex(p, q, &mut mesh)
                        } else {
                            vertex(q, p, &mut mesh)
                        }
                    });
                    if ids[0] != ids[1] && ids[1] != ids[2] && ids[0] != ids[2] {
                        mesh.triangles.push(ids);
                    }
                }
            }
        }
    }
    mesh.compute_normals();
    Ok(mesh)
}

/// Result of [`mise_extract`].
#[derive(Debug, Clone)]
pub struct MiseOutput {
    pub mesh: Mesh,
    /// Field evaluations performed.
    pub evaluations: usize,
    /// Final lattice with unevaluated points filled from coarse cells.
    pub grid: ScalarGrid,
}

/// Field callback: values for a batch of points in `[0, 1]³`.
pub trait FieldEval {
    fn eval(&mut self, points: &[[f64; 3]]) -> Result<Vec<f64>>;
}

impl<F: FnMut(&[[f64; 3]]) -> Result<Vec<f64>>> FieldEval for F {
    fn eval(&mut self, points: &[[f64; 3]]) -> Result<Vec<f64>> {
        self(points)
    }
}

/// Marching cubes on the fully sampled `res³` lattice.
pub fn dense_extract(field: &mut impl FieldEval, res: usize, tau: f64) -> Result<MiseOutput> {
    let n = res + 1;
    let mut pts = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                pts.push(lattice_point(res, [i, j, k]));
            }
        }
    }
    let values = field.eval(&pts)?;
    let grid = ScalarGrid::new(res, values)?;
    Ok(MiseOutput {
        mesh: marching_cubes(&grid, tau)?,
        evaluations: pts.len(),
        grid,
    })
}

const IN: i8 = 1;
const OUT: i8 = -1;
const ACTIVE: i8 = 0;

struct Lattice {
    /// Cells per axis at the finest level.
    res: usize,
    values: Vec<f64>,
    evaluated: Vec<bool>,
    count: usize,
}

impl Lattice {
    fn idx(&self, [i, j, k]: [usize; 3]) -> usize {
        let n = self.res + 1;
        (i * n + j) * n + k
    }

    fn side(&self, p: [usize; 3], tau: f64) -> i8 {
        if self.values[self.idx(p)] >= tau {
            IN
        } else {
            OUT
        }
    }

    /// Evaluates the listed points that have no value yet, in order.
    fn evaluate(&mut self, field: &mut impl FieldEval, points: &[[usize; 3]]) -> Result<()> {
        let mut todo: Vec<usize> = points
            .iter()
            .map(|&p| self.idx(p))
            .filter(|&i| !self.evaluated[i])
            .collect();
        todo.sort_unstable();
        todo.dedup();
        if todo.is_empty() {
            return Ok(());
        }
        let n = self.res + 1;
        let coords: Vec<[f64; 3]> = todo
            .iter()
            .map(|&i| lattice_point(self.res, [i / (n * n), i / n % n, i % n]))
            .collect();
        let vals = field.eval(&coords)?;
        if vals.len() != coords.len() {
            return Err(Error::dim("field evaluation", &[coords.len()], &[vals.len()]));
        }
        for (&i, v) in todo.iter().zip(vals) {
            if !v.is_finite() {
                return Err(Error::Domain(format!("field value {v} is not finite")));
            }
            self.values[i] = v;
            self.evaluated[i] = true;
        }
        self.count += todo.len();
        Ok(())
    }
}

/// Lattice points of a cell's closure at spacing `h`.
fn closure_points(origin: [usize; 3], size: usize, h: usize) -> Vec<[usize; 3]> {
    let m = size / h;
    let mut out = Vec::with_capacity((m + 1).pow(3));
    for a in 0..=m {
        for b in 0..=m {
            for c in 0..=m {
                out.push([origin[0] + a * h, origin[1] + b * h, origin[2] + c * h]);
            }
        }
    }
    out
}

/// Coarse-to-fine extraction.
///
/// Starts from an `initial_res³` lattice and refines `steps` times, each
/// time halving only cells whose corners straddle `tau`. Inactive cells
/// adjacent to refined ones are re-checked against every sample taken on
/// their boundary and activated on any disagreement, until nothing changes.
/// Unsampled points are then filled by trilinear interpolation of the
/// enclosing inactive cell, which keeps them on that cell's side.
///
/// When the field does not cross `tau` inside any inactive cell, the mesh is
/// identical to [`dense_extract`] at `initial_res · 2^steps`.
pub fn mise_extract(field: &mut impl FieldEval, initial_res: usize, steps: u32, tau: f64) -> Result<MiseOutput> {
    if initial_res < 2 {
        return Err(Error::Contract(format!(
            "initial lattice {initial_res} must have at least 2 cells"
        )));
    }
    let res = initial_res << steps;
    let n = res + 1;
    let mut lat = Lattice {
        res,
        values: vec![0.0; n * n * n],
        evaluated: vec![false; n * n * n],
        count: 0,
    };
    let mut size = 1usize << steps;
    lat.evaluate(field, &closure_points([0; 3], res, size))?;

    // side of every cell at the current level
    let mut cells = initial_res;
    let mut side: Vec<i8> = vec![ACTIVE; cells * cells * cells];
    let cell_idx = |c: [usize; 3], cells: usize| (c[0] * cells + c[1]) * cells + c[2];
    let cell_side = |lat: &Lattice, origin: [usize; 3], size: usize| -> i8 {
        let s0 = lat.side(origin, tau);
        let uniform = CORNER_OFFSETS
            .iter()
            .all(|o| lat.side([0, 1, 2].map(|d| origin[d] + o[d] * size), tau) == s0);
        if uniform {
            s0
        } else {
            ACTIVE
        }
    };
    for a in 0..cells {
        for b in 0..cells {
            for c in 0..cells {
                side[cell_idx([a, b, c], cells)] = cell_side(&lat, [a * size, b * size, c * size], size);
            }
        }
    }
    // inactive cells with sampled corners, per level, for the final fill
    let mut fill_sources: Vec<([usize; 3], usize)> = Vec::new();

    loop {
        let h = (size / 2).max(1);
        let mut queue: Vec<usize> = (0..side.len()).filter(|&i| side[i] == ACTIVE).collect();
        while !queue.is_empty() {
            let pts: Vec<[usize; 3]> = queue
                .iter()
                .flat_map(|&ci| {
                    let c = [ci / (cells * cells), ci / cells % cells, ci % cells];
                    closure_points(c.map(|x| x * size), size, h)
                })
                .collect();
            lat.evaluate(field, &pts)?;
            let mut next = Vec::new();
            for &ci in &queue {
                let c = [ci / (cells * cells), ci / cells % cells, ci % cells];
                for d in 0..27 {
                    let off = [d / 9, d / 3 % 3, d % 3];
                    let nb = [0, 1, 2].map(|a| (c[a] + off[a]).wrapping_sub(1));
                    if nb.iter().any(|&x| x >= cells) {
                        continue;
                    }
                    let ni = cell_idx(nb, cells);
                    let s = side[ni];
                    if s == ACTIVE {
                        continue;
                    }
                    let conflict = closure_points(nb.map(|x| x * size), size, h)
                        .into_iter()
                        .any(|p| lat.evaluated[lat.idx(p)] && lat.side(p, tau) != s);
                    if conflict {
                        side[ni] = ACTIVE;
                        next.push(ni);
                    }
                }
            }
            next.sort_unstable();
            queue = next;
        }
        for (ci, &s) in side.iter().enumerate() {
            if s != ACTIVE {
                let c = [ci / (cells * cells), ci / cells % cells, ci % cells];
                let origin = c.map(|x| x * size);
                if CORNER_OFFSETS
                    .iter()
                    .all(|o| lat.evaluated[lat.idx([0, 1, 2].map(|d| origin[d] + o[d] * size))])
                {
                    fill_sources.push((origin, size));
                }
            }
        }
        if size == 1 {
            break;
        }
        // descend: children of active cells are classified from their
        // corners, the rest inherit their parent's side
        let child_cells = cells * 2;
        let child_size = size / 2;
        let mut child_side = vec![ACTIVE; child_cells.pow(3)];
        for a in 0..child_cells {
            for b in 0..child_cells {
                for c in 0..child_cells {
                    let parent = side[cell_idx([a / 2, b / 2, c / 2], cells)];
                    child_side[cell_idx([a, b, c], child_cells)] = if parent == ACTIVE {
                        cell_side(&lat, [a * child_size, b * child_size, c * child_size], child_size)
                    } else {
                        parent
                    };
                }
            }
        }
        side = child_side;
        cells = child_cells;
        size = child_size;
    }

    let mut filled = lat.evaluated.clone();
    for &(origin, size) in &fill_sources {
        if size == 1 {
            continue;
        }
        let corner = |o: [usize; 3]| lat.values[lat.idx([0, 1, 2].map(|d| origin[d] + o[d] * size))];
        let cv: [f64; 8] = std::array::from_fn(|c| corner(CORNER_OFFSETS[c]));
        for p in closure_points(origin, size, 1) {
            let i = lat.idx(p);
            if filled[i] {
                continue;
            }
            let t = [0, 1, 2].map(|d| (p[d] - origin[d]) as f64 / size as f64);
            let mut v = 0.0;
            for (c, o) in CORNER_OFFSETS.iter().enumerate() {
                let w: f64 = (0..3).map(|d| if o[d] == 1 { t[d] } else { 1.0 - t[d] }).product();
                v += w * cv[c];
            }
            lat.values[i] = v;
            filled[i] = true;
        }
    }
    debug_assert!(filled.iter().all(|&f| f), "every lattice point is sampled or filled");
    let grid = ScalarGrid::new(res, lat.values)?;
    Ok(MiseOutput {
        mesh: marching_cubes(&grid, tau)?,
        evaluations: lat.count,
        grid,
    })
}

pub use obj::{read_obj, write_obj};

#[cfg(test)]
mod tests;
