//! Reconstruction quality: volumetric IoU, Chamfer distances, normal
//! consistency and F-score, all on point samples.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{analytic_occupancy, derive_seed, sample_surface, ShapeSpec};
use crate::meshing::Mesh;

mod nn;
mod parity;

pub use nn::NearestIndex;
pub use parity::InsideTest;

/// `|pred ∧ gt| / |pred ∨ gt|`, and 1 when both are empty.
pub fn volumetric_iou(pred: &[bool], gt: &[bool]) -> Result<f64> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(Error::Contract(format!(
            "IoU needs equal non-empty occupancy vectors, got {} and {}",
            pred.len(),
            gt.len()
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &g) in pred.iter().zip(gt) {
        inter += usize::from(p && g);
        union += usize::from(p || g);
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Points with unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedPoints {
    pub points: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
}

/// `n` points uniform over the mesh surface, carrying their face normal.
pub fn sample_mesh_points(mesh: &Mesh, n: usize, seed: u64) -> Result<OrientedPoints> {
    mesh.validate()?;
    let areas: Vec<f64> = (0..mesh.triangles.len()).map(|t| mesh.face_area(t)).collect();
    let mut cumulative = Vec::with_capacity(areas.len());
    let mut total = 0.0;
    for a in &areas {
        total += a;
        cumulative.push(total);
    }
    if mesh.is_empty() || total <= 0.0 {
        return Err(Error::EmptyMesh);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OrientedPoints {
        points: Vec::with_capacity(n),
        normals: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let u = rng.random_range(0.0..total);
        let t = cumulative.partition_point(|&c| c <= u).min(areas.len() - 1);
        let (mut r1, mut r2): (f64, f64) = (rng.random(), rng.random());
        if r1 + r2 > 1.0 {
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        let [a, b, c] = mesh.triangles[t].map(|i| mesh.vertices[i]);
        out.points
            .push(std::array::from_fn(|d| a[d] + r1 * (b[d] - a[d]) + r2 * (c[d] - a[d])));
        let n = mesh.face_cross(t);
        let l = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        out.normals.push(n.map(|x| x / l));
    }
    Ok(out)
}

/// Chamfer distances and F-score between two point sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamferFscore {
    pub cd_l1: f64,
    pub cd_l2: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

fn check_points(what: &str, p: &[[f64; 3]]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Contract(format!("{what} point set is empty")));
    }
    if p.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Domain(format!("{what} point set has a non-finite coordinate")));
    }
    Ok(())
}

/// `½(mean_a d(x, b) + mean_b d(y, a))` with plain and squared distances;
/// precision and recall count points within `threshold` of the other set.
pub fn chamfer_and_fscore(a: &[[f64; 3]], b: &[[f64; 3]], threshold: f64) -> Result<ChamferFscore> {
    check_points("first", a)?;
    check_points("second", b)?;
    let one_way = |src: &[[f64; 3]], dst: &[[f64; 3]]| {
        let index = NearestIndex::new(dst);
        let (mut l1, mut l2, mut hits) = (0.0, 0.0, 0usize);
        for &p in src {
            let (d2, _) = index.nearest(p);
            let d = d2.sqrt();
            l1 += d;
            l2 += d2;
            hits += usize::from(d <= threshold);
        }
        let n = src.len() as f64;
        (l1 / n, l2 / n, hits as f64 / n)
    };
    let (ab1, ab2, precision) = one_way(a, b);
    let (ba1, ba2, recall) = one_way(b, a);
    let fscore = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ChamferFscore {
        cd_l1: 0.5 * (ab1 + ba1),
        cd_l2: 0.5 * (ab2 + ba2),
        precision,
        recall,
        fscore,
    })
}

/// Mean `|n_x · n_nn(x)|`, averaged over both directions.
pub fn normal_consistency(a: &OrientedPoints, b: &OrientedPoints) -> Result<f64> {
    for (what, s) in [("first", a), ("second", b)] {
        check_points(what, &s.points)?;
        if s.normals.len() != s.points.len() {
            return Err(Error::dim(
                "normal_consistency",
                &[s.points.len(), 3],
                &[s.normals.len(), 3],
            ));
        }
        if let Some(n) = s
            .normals
            .iter()
            .find(|n| ((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs() > 1e-6)
        {
            return Err(Error::Contract(format!("{what} set has non-unit normal {n:?}")));
        }
    }
    let one_way = |src: &OrientedPoints, dst: &OrientedPoints| {
        let index = NearestIndex::new(&dst.points);
        let mut acc = 0.0;
        for (p, n) in src.points.iter().zip(&src.normals) {
            let (_, j) = index.nearest(*p);
            let m = dst.normals[j];
            acc += (n[0] * m[0] + n[1] * m[1] + n[2] * m[2]).abs();
        }
        acc / src.points.len() as f64
    };
    Ok(0.5 * (one_way(a, b) + one_way(b, a)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Surface samples on each of prediction and ground truth.
    pub n_surface_samples: usize,
    /// Uniform queries for IoU.
    pub n_iou_queries: usize,
    /// F-score distance, in unit-cube units.
    pub fscore_threshold: f64,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            n_surface_samples: 100_000,
            n_iou_queries: 100_000,
            fscore_threshold: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub iou: f64,
    pub chamfer_l1_x100: f64,
    pub chamfer_l2_x10000: f64,
    pub normal_consistency: f64,
    pub f_score_1pct: f64,
    pub n_surface_samples: usize,
    pub n_iou_queries: usize,
    pub seed: u64,
}

impl MetricsReport {
    pub const KEYS: [&'static str; 8] = [
        "iou",
        "chamfer_l1_x100",
        "chamfer_l2_x10000",
        "normal_consistency",
        "f_score_1pct",
        "n_surface_samples",
        "n_iou_queries",
        "seed",
    ];

    /// One `key = value` line per field, in [`Self::KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let vals = [
            self.iou.to_string(),
            self.chamfer_l1_x100.to_string(),
            self.chamfer_l2_x10000.to_string(),
            self.normal_consistency.to_string(),
            self.f_score_1pct.to_string(),
            self.n_surface_samples.to_string(),
            self.n_iou_queries.to_string(),
            self.seed.to_string(),
        ];
        for (k, v) in Self::KEYS.iter().zip(vals) {
            writeln!(s, "{k} = {v}").expect("string write");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut vals = std::collections::HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("metrics line {line:?} has no '='")))?;
            vals.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            vals.get(k)
                .ok_or_else(|| Error::Format(format!("metrics key {k} missing")))
        };
        let f = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| Error::Format(format!("bad value for {k}"))) };
        let u = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| Error::Format(format!("bad value for {k}"))) };
        Ok(Self {
            iou: f("iou")?,
            chamfer_l1_x100: f("chamfer_l1_x100")?,
            chamfer_l2_x10000: f("chamfer_l2_x10000")?,
            normal_consistency: f("normal_consistency")?,
            f_score_1pct: f("f_score_1pct")?,
            n_surface_samples: u("n_surface_samples")? as usize,
            n_iou_queries: u("n_iou_queries")? as usize,
            seed: u("seed")?,
        })
    }

    /// Bounded fields lie in `[0, 1]`, distances are non-negative.
    pub fn in_range(&self) -> bool {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        unit(self.iou)
            && unit(self.normal_consistency)
            && unit(self.f_score_1pct)
            && self.chamfer_l1_x100 >= 0.0
            && self.chamfer_l2_x10000 >= 0.0
    }
}

/// Uniform IoU queries for an evaluation, with analytic labels.
pub fn iou_queries(spec: &ShapeSpec, cfg: &EvalConfig) -> Result<(Vec<[f64; 3]>, Vec<bool>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 103));
    let pts: Vec<[f64; 3]> = (0..cfg.n_iou_queries)
        .map(|_| std::array::from_fn(|_| rng.random::<f64>()))
        .collect();
    let gt = pts
        .iter()
        .map(|&p| analytic_occupancy(spec, p))
        .collect::<Result<Vec<_>>>()?;
    Ok((pts, gt))
}

/// Full report for a mesh against an analytic shape. Predicted occupancy
/// of the IoU queries is inside-ness of the mesh.
pub fn evaluate_reconstruction(mesh: &Mesh, spec: &ShapeSpec, cfg: &EvalConfig) -> Result<MetricsReport> {
    let inside = InsideTest::new(mesh)?;
    evaluate_reconstruction_with(mesh, spec, cfg, |q| Ok(q.iter().map(|&p| inside.contains(p)).collect()))
}

/// As [`evaluate_reconstruction`], with IoU occupancy from `occupancy`
/// (for example the thresholded decoder).
pub fn evaluate_reconstruction_with(
    mesh: &Mesh,
    spec: &ShapeSpec,
    cfg: &EvalConfig,
    occupancy: impl FnOnce(&[[f64; 3]]) -> Result<Vec<bool>>,
) -> Result<MetricsReport> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let gt = sample_surface(spec, cfg.n_surface_samples, 0.0, derive_seed(cfg.seed, 101))?;
    let gt = OrientedPoints {
        normals: gt
            .normals
            .ok_or_else(|| Error::Contract("surface sampler returned no normals".into()))?,
        points: gt.coords,
    };
    let pred = sample_mesh_points(mesh, cfg.n_surface_samples, derive_seed(cfg.seed, 102))?;
    let cf = chamfer_and_fscore(&pred.points, &gt.points, cfg.fscore_threshold)?;
    let nc = normal_consistency(&pred, &gt)?;
    let (queries, labels) = iou_queries(spec, cfg)?;
    let pred_occ = occupancy(&queries)?;
    Ok(MetricsReport {
        iou: volumetric_iou(&pred_occ, &labels)?,
        chamfer_l1_x100: cf.cd_l1 * 1e2,
        chamfer_l2_x10000: cf.cd_l2 * 1e4,
        normal_consistency: nc,
        f_score_1pct: cf.fscore,
        n_surface_samples: cfg.n_surface_samples,
        n_iou_queries: cfg.n_iou_queries,
        seed: cfg.seed,
    })
}
