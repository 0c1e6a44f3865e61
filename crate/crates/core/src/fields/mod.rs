//! Analytic shapes, surface and query samplers, boundary extraction.
//!
//! Everything lives in the unit cube. Shapes must keep their surface inside
//! `[0.05, 0.95]³` so noisy samples stay in range after clamping.

mod dataset;

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use dataset::Dataset;

/// Surface must stay this far from the cube faces.
pub const PADDING: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    Box {
        center: [f64; 3],
        half_extents: [f64; 3],
    },
    /// Ring in the xy-plane around the z axis through `center`.
    Torus {
        center: [f64; 3],
        major: f64,
        minor: f64,
    },
    Union(Vec<ShapeSpec>),
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl ShapeSpec {
    /// Sphere on the left, cube on the right, overlapping.
    pub fn toy_scene() -> Self {
        ShapeSpec::Union(vec![
            ShapeSpec::Sphere {
                center: [0.38, 0.5, 0.5],
                radius: 0.22,
            },
            ShapeSpec::Box {
                center: [0.66, 0.5, 0.5],
                half_extents: [0.16, 0.16, 0.16],
            },
        ])
    }

    /// Signed distance; negative inside. Exact for every primitive; a union
    /// takes the minimum, which is exact outside and a bound inside.
    pub fn sdf(&self, q: [f64; 3]) -> f64 {
        match self {
            ShapeSpec::Sphere { center, radius } => norm(sub(q, *center)) - radius,
            ShapeSpec::Box { center, half_extents } => {
                let d = sub(q, *center);
                let e: [f64; 3] = std::array::from_fn(|i| d[i].abs() - half_extents[i]);
                let outside = norm([e[0].max(0.0), e[1].max(0.0), e[2].max(0.0)]);
                outside + e[0].max(e[1]).max(e[2]).min(0.0)
            }
            ShapeSpec::Torus { center, major, minor } => {
                let d = sub(q, *center);
                let ring = (d[0] * d[0] + d[1] * d[1]).sqrt() - major;
                (ring * ring + d[2] * d[2]).sqrt() - minor
            }
            ShapeSpec::Union(parts) => parts.iter().map(|s| s.sdf(q)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Axis-aligned bounds of the surface.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let around = |c: [f64; 3], h: [f64; 3]| {
            (
                std::array::from_fn(|i| c[i] - h[i]),
                std::array::from_fn(|i| c[i] + h[i]),
            )
        };
        match self {
            ShapeSpec::Sphere { center, radius } => around(*center, [*radius; 3]),
            ShapeSpec::Box { center, half_extents } => around(*center, *half_extents),
            ShapeSpec::Torus { center, major, minor } => around(*center, [major + minor, major + minor, *minor]),
            ShapeSpec::Union(parts) => {
                let mut lo = [f64::INFINITY; 3];
                let mut hi = [f64::NEG_INFINITY; 3];
                for p in parts {
                    let (a, b) = p.bounds();
                    for i in 0..3 {
                        lo[i] = lo[i].min(a[i]);
                        hi[i] = hi[i].max(b[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Checks sizes and the padding margin.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        match self {
            ShapeSpec::Sphere { radius, .. } if radius.is_nan() || *radius <= 0.0 => {
                return bad(format!("sphere radius must be positive, got {radius}"))
            }
            ShapeSpec::Box { half_extents, .. } if half_extents.iter().any(|h| h.is_nan() || *h <= 0.0) => {
                return bad(format!("box half extents must be positive, got {half_extents:?}"))
            }
            ShapeSpec::Torus { major, minor, .. } if !(*minor > 0.0 && minor < major) => {
                return bad(format!("torus needs 0 < minor < major, got {minor}, {major}"))
            }
            ShapeSpec::Union(parts) if parts.is_empty() => return bad("empty union".into()),
            ShapeSpec::Union(parts) => {
                for p in parts {
                    p.validate()?;
                }
            }
            _ => {}
        }
        let (lo, hi) = self.bounds();
        let inside = |v: f64| (PADDING - 1e-12..=1.0 - PADDING + 1e-12).contains(&v);
        if !lo.iter().chain(&hi).all(|&v| inside(v)) {
            return bad(format!(
                "shape bounds {lo:?}..{hi:?} leave [{PADDING}, {}]³",
                1.0 - PADDING
            ));
        }
        Ok(())
    }

    fn area(&self) -> f64 {
        match self {
            ShapeSpec::Sphere { radius, .. } => 4.0 * PI * radius * radius,
            ShapeSpec::Box { half_extents: h, .. } => 8.0 * (h[0] * h[1] + h[1] * h[2] + h[2] * h[0]),
            ShapeSpec::Torus { major, minor, .. } => 4.0 * PI * PI * major * minor,
            ShapeSpec::Union(parts) => parts.iter().map(ShapeSpec::area).sum(),
        }
    }

    fn primitives(&self) -> Vec<&ShapeSpec> {
        match self {
            ShapeSpec::Union(parts) => parts.iter().flat_map(ShapeSpec::primitives).collect(),
            other => vec![other],
        }
    }
}

/// Uniform point (by area) on a primitive surface, with its outward normal.
fn sample_primitive(shape: &ShapeSpec, rng: &mut ChaCha8Rng) -> ([f64; 3], [f64; 3]) {
    match shape {
        ShapeSpec::Sphere { center, radius } => {
            let n = loop {
                let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let l = norm(g);
                if l > 1e-12 {
                    break [g[0] / l, g[1] / l, g[2] / l];
                }
            };
            (std::array::from_fn(|i| center[i] + radius * n[i]), n)
        }
        ShapeSpec::Box {
            center,
            half_extents: h,
        } => {
            // faces normal to x, y, z come in pairs
            let areas = [h[1] * h[2], h[0] * h[2], h[0] * h[1]];
            let total: f64 = areas.iter().sum();
            let mut pick = rng.random_range(0.0..total);
            let mut axis = 2;
            for (i, a) in areas.iter().enumerate() {
                if pick < *a {
                    axis = i;
                    break;
                }
                pick -= a;
            }
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut p = [0.0; 3];
            let mut n = [0.0; 3];
            for i in 0..3 {
                p[i] = if i == axis {
                    center[i] + sign * h[i]
                } else {
                    center[i] + rng.random_range(-h[i]..h[i])
                };
            }
            n[axis] = sign;
            (p, n)
        }
        ShapeSpec::Torus { center, major, minor } => {
            let u = rng.random_range(0.0..2.0 * PI);
            let v = loop {
                let v = rng.random_range(0.0..2.0 * PI);
                let accept = (major + minor * v.cos()) / (major + minor);
                if rng.random::<f64>() < accept {
                    break v;
                }
            };
            let n = [v.cos() * u.cos(), v.cos() * u.sin(), v.sin()];
            let ring = major + minor * v.cos();
            (
                [
                    center[0] + ring * u.cos(),
                    center[1] + ring * u.sin(),
                    center[2] + minor * v.sin(),
                ],
                n,
            )
        }
        ShapeSpec::Union(_) => unreachable!("unions are flattened before sampling"),
    }
}

/// 1 iff `q` is inside or on the surface.
pub fn analytic_occupancy(spec: &ShapeSpec, q: [f64; 3]) -> Result<bool> {
    if !q.iter().all(|c| (0.0..=1.0).contains(c)) {
        return Err(Error::Domain(format!("query {q:?} outside [0, 1]³")));
    }
    Ok(inside(spec, q))
}

fn inside(spec: &ShapeSpec, q: [f64; 3]) -> bool {
    match spec {
        ShapeSpec::Union(parts) => parts.iter().any(|p| inside(p, q)),
        s => s.sdf(q) <= 0.0,
    }
}

/// Input point cloud, optionally with the outward normal each point was
/// drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct PointBatch {
    pub coords: Vec<[f64; 3]>,
    pub normals: Option<Vec<[f64; 3]>>,
}

impl PointBatch {
    pub fn new(coords: Vec<[f64; 3]>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Contract("a point batch needs at least one point".into()));
        }
        if let Some(p) = coords.iter().find(|p| !p.iter().all(|c| (0.0..=1.0).contains(c))) {
            return Err(Error::Domain(format!("point {p:?} outside [0, 1]³")));
        }
        Ok(Self { coords, normals: None })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Flattened `⌊coord · res⌋` cell per point.
    pub fn cell_ids(&self, res: usize) -> Vec<usize> {
        self.coords
            .iter()
            .map(|&p| crate::tensor::cell_of(p, res).expect("coords validated on construction"))
            .collect()
    }
}

/// Draws `n` points uniformly by area over the visible surface, then adds
/// isotropic Gaussian noise and clamps to the unit cube.
pub fn sample_surface(spec: &ShapeSpec, n: usize, sigma: f64, seed: u64) -> Result<PointBatch> {
    spec.validate()?;
    if n == 0 || sigma.is_nan() || sigma < 0.0 {
        return Err(Error::Domain(format!(
            "sample_surface needs n >= 1 and sigma >= 0, got {n}, {sigma}"
        )));
    }
    let prims = spec.primitives();
    let areas: Vec<f64> = prims.iter().map(|p| p.area()).collect();
    let total: f64 = areas.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let max_draws = 1000 * n as u64 + 10_000;
    let mut draws = 0u64;
    while coords.len() < n {
        draws += 1;
        if draws > max_draws {
            return Err(Error::Domain(
                "surface sampling rejected nearly every draw; is a primitive fully hidden?".into(),
            ));
        }
        let mut pick = rng.random_range(0.0..total);
        let mut k = prims.len() - 1;
        for (i, a) in areas.iter().enumerate() {
            if pick < *a {
                k = i;
                break;
            }
            pick -= a;
        }
        let (p, nrm) = sample_primitive(prims[k], &mut rng);
        let hidden = prims.iter().enumerate().any(|(j, s)| j != k && s.sdf(p) < 0.0);
        if hidden {
            continue;
        }
        let noisy: [f64; 3] = std::array::from_fn(|i| {
            let e: f64 = rng.sample(StandardNormal);
            (p[i] + sigma * e).clamp(0.0, 1.0)
        });
        coords.push(noisy);
        normals.push(nrm);
    }
    Ok(PointBatch {
        coords,
        normals: Some(normals),
    })
}

/// Labelled query points with an optional boundary subset.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    pub coords: Vec<[f64; 3]>,
    pub labels: Vec<bool>,
    pub boundary_mask: Vec<bool>,
}

impl QuerySet {
    pub fn new(coords: Vec<[f64; 3]>, labels: Vec<bool>) -> Result<Self> {
        if coords.len() != labels.len() {
            return Err(Error::dim("query_set", &[coords.len(), 3], &[labels.len()]));
        }
        let m = coords.len();
        Ok(Self {
            coords,
            labels,
            boundary_mask: vec![false; m],
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// The boundary-masked subset, in original order.
    pub fn boundary_subset(&self) -> QuerySet {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.boundary_mask[i]).collect();
        QuerySet {
            coords: keep.iter().map(|&i| self.coords[i]).collect(),
            labels: keep.iter().map(|&i| self.labels[i]).collect(),
            boundary_mask: vec![true; keep.len()],
        }
    }

    pub fn label_values(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| f64::from(u8::from(l))).collect()
    }
}

/// `m` uniform queries in the unit cube labelled by analytic occupancy.
pub fn sample_queries(spec: &ShapeSpec, m: usize, seed: u64) -> Result<QuerySet> {
    spec.validate()?;
    if m == 0 {
        return Err(Error::Domain("sample_queries needs m >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<[f64; 3]> = (0..m).map(|_| std::array::from_fn(|_| rng.random::<f64>())).collect();
    let labels = coords.iter().map(|&q| inside(spec, q)).collect();
    QuerySet::new(coords, labels)
}

/// Result of a boundary search.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryExtraction {
    pub queries: QuerySet,
    pub count: usize,
    /// No pair of opposite-label points exists anywhere in the set.
    pub no_opposite_pair: bool,
}

/// Marks every query that has an opposite-label query within `radius`
/// (Euclidean, inclusive). Uses a uniform hash of cell size `radius`.
pub fn extract_boundary(qs: &QuerySet, radius: f64) -> Result<BoundaryExtraction> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::Domain(format!("boundary radius must be positive, got {radius}")));
    }
    let key = |p: [f64; 3]| -> [i64; 3] { std::array::from_fn(|i| (p[i] / radius).floor() as i64) };
    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, &p) in qs.coords.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(i);
    }
    let r2 = radius * radius;
    let mut mask = vec![false; qs.len()];
    for (i, &p) in qs.coords.iter().enumerate() {
        let k = key(p);
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(list) = buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else {
                        continue;
                    };
                    for &j in list {
                        if qs.labels[j] != qs.labels[i] && dist2(p, qs.coords[j]) <= r2 {
                            mask[i] = true;
                            break 'search;
                        }
                    }
                }
            }
        }
    }
    let count = mask.iter().filter(|&&b| b).count();
    let no_opposite_pair = count == 0;
    if no_opposite_pair {
        log::warn!("no query has an opposite-label neighbour within {radius}; boundary set is empty");
    }
    let mut queries = qs.clone();
    queries.boundary_mask = mask;
    Ok(BoundaryExtraction {
        queries,
        count,
        no_opposite_pair,
    })
}

pub(crate) fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = sub(a, b);
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

/// Independent seed for stream `stream` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

#[cfg(test)]
mod tests;
