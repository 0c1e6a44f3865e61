use std::collections::HashMap;

use proptest::prelude::*;

use super::obj::sig9;
use super::*;

fn sphere_occupancy(c: [f64; 3], r: f64) -> impl Fn([f64; 3]) -> f64 {
    move |p| {
        let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt();
        if d <= r {
            1.0
        } else {
            0.0
        }
    }
}

/// Smooth probability field of a sphere.
fn soft_sphere(c: [f64; 3], r: f64) -> impl Fn([f64; 3]) -> f64 {
    move |p| {
        let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt();
        1.0 / (1.0 + ((d - r) * 40.0).exp())
    }
}

fn batch<F: Fn([f64; 3]) -> f64>(f: F) -> impl FnMut(&[[f64; 3]]) -> Result<Vec<f64>> {
    move |pts: &[[f64; 3]]| Ok(pts.iter().map(|&p| f(p)).collect())
}

fn radius(p: [f64; 3], c: [f64; 3]) -> f64 {
    ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt()
}

/// Vertices keyed by coordinates rounded to 1e-9 units, with triangles as
/// sorted coordinate triples; independent of vertex numbering.
fn triangle_set(m: &Mesh) -> Vec<[[i64; 3]; 3]> {
    let key = |p: [f64; 3]| p.map(|c| (c * 1e9).round() as i64);
    let mut out: Vec<[[i64; 3]; 3]> = m
        .triangles
        .iter()
        .map(|t| {
            // rotate so the smallest vertex leads; keeps winding
            let v = t.map(|i| key(m.vertices[i]));
            let s = (0..3).min_by_key(|&k| v[k]).unwrap();
            [v[s], v[(s + 1) % 3], v[(s + 2) % 3]]
        })
        .collect();
    out.sort_unstable();
    out
}

fn min_vertex_gap(m: &Mesh) -> f64 {
    let cell = 1e-6;
    let mut hash: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, v) in m.vertices.iter().enumerate() {
        hash.entry(v.map(|c| (c / cell).floor() as i64)).or_default().push(i);
    }
    let mut best = f64::INFINITY;
    for (i, v) in m.vertices.iter().enumerate() {
        let k = v.map(|c| (c / cell).floor() as i64);
        for d in 0..27i64 {
            let nk = [k[0] + d / 9 - 1, k[1] + d / 3 % 3 - 1, k[2] + d % 3 - 1];
            for &j in hash.get(&nk).into_iter().flatten() {
                if j != i {
                    best = best.min(radius(*v, m.vertices[j]));
                }
            }
        }
    }
    best
}

// ------------------------------------------------------------ marching cubes

#[test]
fn uniform_field_gives_empty_mesh() {
    for v in [0.0, 1.0] {
        let g = ScalarGrid::from_fn(8, |_| v).unwrap();
        let m = marching_cubes(&g, 0.5).unwrap();
        assert!(m.is_empty() && m.vertices.is_empty());
    }
}

#[test]
fn linear_ramp_gives_plane_at_half() {
    for res in [7, 8, 16] {
        let g = ScalarGrid::from_fn(res, |p| 0.5 + (p[0] - 0.5)).unwrap();
        let m = marching_cubes(&g, 0.5).unwrap();
        assert!(!m.is_empty());
        for v in &m.vertices {
            assert!((v[0] - 0.5).abs() < 1e-12, "res {res}: {v:?}");
        }
        assert!((m.surface_area() - 1.0).abs() < 1e-9, "res {res}: {}", m.surface_area());
        // field grows with x, so normals point to -x
        assert!(m.normals.iter().all(|n| (n[0] + 1.0).abs() < 1e-9));
    }
}

#[test]
fn hard_sphere_is_a_closed_genus_zero_manifold() {
    let c = [0.5, 0.5, 0.5];
    let r = 0.3;
    let g = ScalarGrid::from_fn(64, sphere_occupancy(c, r)).unwrap();
    let m = marching_cubes(&g, 0.5).unwrap();
    assert!(m.is_closed_manifold());
    assert_eq!(m.euler_characteristic(), 2);
    let diag = 3f64.sqrt() / 64.0;
    assert!(m.vertices.iter().all(|&v| (radius(v, c) - r).abs() <= diag));
    assert!(m.signed_volume() > 0.0, "faces wind outward");
    let outward = m
        .vertices
        .iter()
        .zip(&m.normals)
        .all(|(v, n)| (0..3).map(|d| (v[d] - c[d]) * n[d]).sum::<f64>() > 0.0);
    assert!(outward);
    assert!(m
        .normals
        .iter()
        .all(|n| (n.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12));
    assert!(min_vertex_gap(&m) > 1e-9);
}

#[test]
fn soft_sphere_vertices_lie_near_true_radius() {
    let c = [0.45, 0.52, 0.5];
    let r = 0.27;
    let g = ScalarGrid::from_fn(40, soft_sphere(c, r)).unwrap();
    let m = marching_cubes(&g, 0.5).unwrap();
    assert!(m.is_closed_manifold());
    assert_eq!(m.euler_characteristic(), 2);
    let diag = 3f64.sqrt() / 40.0;
    assert!(m.vertices.iter().all(|&v| (radius(v, c) - r).abs() <= diag));
    let vol = 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
    assert!((m.signed_volume() - vol).abs() / vol < 0.01);
}

#[test]
fn two_disjoint_spheres_have_euler_characteristic_four() {
    let a = soft_sphere([0.25, 0.5, 0.5], 0.15);
    let b = soft_sphere([0.75, 0.5, 0.5], 0.15);
    let g = ScalarGrid::from_fn(32, |p| a(p).max(b(p))).unwrap();
    let m = marching_cubes(&g, 0.5).unwrap();
    assert!(m.is_closed_manifold());
    assert_eq!(m.euler_characteristic(), 4);
}

#[test]
fn torus_has_euler_characteristic_zero() {
    let g = ScalarGrid::from_fn(48, |p| {
        let q = [p[0] - 0.5, p[1] - 0.5, p[2] - 0.5];
        let ring = ((q[0] * q[0] + q[1] * q[1]).sqrt() - 0.28).hypot(q[2]);
        1.0 / (1.0 + ((ring - 0.1) * 40.0).exp())
    })
    .unwrap();
    let m = marching_cubes(&g, 0.5).unwrap();
    assert!(m.is_closed_manifold());
    assert_eq!(m.euler_characteristic(), 0);
}

#[test]
fn random_binary_fields_give_oriented_manifolds() {
    // every cube case, ambiguous faces included, must stitch consistently
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let res = 6;
        let n = res + 1;
        let values: Vec<f64> = (0..n * n * n)
            .map(|i| {
                let (a, b, c) = (i / (n * n), i / n % n, i % n);
                let border = [a, b, c].iter().any(|&x| x == 0 || x == res);
                if border || rng.random_bool(0.5) {
                    0.0
                } else {
                    1.0
                }
            })
            .collect();
        let m = marching_cubes(&ScalarGrid::new(res, values).unwrap(), 0.5).unwrap();
        let directed = m
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |e| (t[e], t[(e + 1) % 3])));
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for e in directed {
            *count.entry(e).or_default() += 1;
        }
        assert!(count
            .iter()
            .all(|(&(a, b), &k)| k == 1 && count.get(&(b, a)) == Some(&1)));
        assert!(m.signed_volume() > 0.0 || m.is_empty());
        assert!(m.is_empty() || m.is_closed_manifold());
    }
}

#[test]
fn vertices_lie_on_lattice_edges() {
    let g = ScalarGrid::from_fn(12, soft_sphere([0.5; 3], 0.31)).unwrap();
    let m = marching_cubes(&g, 0.5).unwrap();
    for v in &m.vertices {
        let off_lattice = v
            .iter()
            .filter(|&&c| ((c * 12.0).round() - c * 12.0).abs() > 1e-9)
            .count();
        assert!(off_lattice <= 1, "{v:?}");
    }
}

#[test]
fn exact_threshold_values_do_not_duplicate_vertices() {
    let g = ScalarGrid::from_fn(8, |p| if p[0] >= 0.5 { 0.5 } else { 0.0 }).unwrap();
    let m = marching_cubes(&g, 0.5).unwrap();
    assert!(!m.is_empty());
    assert!(min_vertex_gap(&m) > 1e-9);
    assert!((0..m.triangles.len()).all(|t| m.face_area(t) > 0.0));
}

#[test]
fn scalar_grid_contract() {
    assert!(ScalarGrid::new(2, vec![0.0; 26]).is_err());
    assert!(ScalarGrid::new(2, vec![f64::NAN; 27]).is_err());
    assert!(ScalarGrid::new(0, vec![0.0]).is_err());
    let g = ScalarGrid::from_fn(4, |p| p[0] + 10.0 * p[1] + 100.0 * p[2]).unwrap();
    assert_eq!(g.value([1, 2, 3]), 0.25 + 5.0 + 75.0);
    assert_eq!(g.point([4, 0, 2]), [1.0, 0.0, 0.5]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shifting_field_and_threshold_together_is_invariant(
        c in prop::array::uniform3(0.35f64..0.65), r in 0.1f64..0.3, shift in -0.4f64..0.4,
    ) {
        let f = soft_sphere(c, r);
        let g = ScalarGrid::from_fn(10, &f).unwrap();
        let h = ScalarGrid::from_fn(10, |p| f(p) + shift).unwrap();
        let a = marching_cubes(&g, 0.5).unwrap();
        let b = marching_cubes(&h, 0.5 + shift).unwrap();
        prop_assert_eq!(&a.triangles, &b.triangles);
        for (u, v) in a.vertices.iter().zip(&b.vertices) {
            for d in 0..3 {
                prop_assert!((u[d] - v[d]).abs() < 1e-9);
            }
        }
    }
}

// ---------------------------------------------------------------------- MISE

#[test]
fn mise_on_uniform_field_evaluates_only_the_initial_lattice() {
    let mut f = batch(|_| 0.1);
    let out = mise_extract(&mut f, 8, 2, 0.5).unwrap();
    assert!(out.mesh.is_empty());
    assert_eq!(out.evaluations, 9 * 9 * 9);
}

#[test]
fn mise_matches_dense_on_sphere() {
    let f = soft_sphere([0.5, 0.48, 0.53], 0.3);
    let mise = mise_extract(&mut batch(&f), 32, 2, 0.5).unwrap();
    let dense = dense_extract(&mut batch(&f), 128, 0.5).unwrap();
    assert_eq!(mise.mesh.triangles.len(), dense.mesh.triangles.len());
    assert_eq!(mise.mesh.vertices.len(), dense.mesh.vertices.len());
    assert_eq!(triangle_set(&mise.mesh), triangle_set(&dense.mesh));
    for (a, b) in mise.mesh.vertices.iter().zip(&dense.mesh.vertices) {
        for d in 0..3 {
            assert!((a[d] - b[d]).abs() < 1e-9);
        }
    }
    assert!(mise.evaluations < 129usize.pow(3), "{}", mise.evaluations);
}

#[test]
fn mise_matches_dense_on_hard_sphere_and_multiple_bodies() {
    let hard = sphere_occupancy([0.5; 3], 0.33);
    let a = soft_sphere([0.3, 0.5, 0.5], 0.12);
    let b = soft_sphere([0.7, 0.45, 0.55], 0.18);
    let two = move |p: [f64; 3]| a(p).max(b(p));
    let fields: [&dyn Fn([f64; 3]) -> f64; 2] = [&hard, &two];
    for f in fields {
        let mise = mise_extract(&mut batch(f), 8, 3, 0.5).unwrap();
        let dense = dense_extract(&mut batch(f), 64, 0.5).unwrap();
        assert_eq!(triangle_set(&mise.mesh), triangle_set(&dense.mesh));
        assert!(mise.evaluations < 65usize.pow(3));
    }
}

#[test]
fn mise_recovers_features_missed_by_coarse_corners() {
    // a small ball straddling a coarse face: no coarse corner is inside,
    // but its neighbor is refined because the main body passes through
    let big = soft_sphere([0.5, 0.5, 0.3], 0.2);
    let bump = soft_sphere([0.5, 0.5, 0.5 + 0.02], 0.04);
    let f = move |p: [f64; 3]| big(p).max(bump(p));
    let mise = mise_extract(&mut batch(&f), 4, 3, 0.5).unwrap();
    let dense = dense_extract(&mut batch(&f), 32, 0.5).unwrap();
    assert_eq!(triangle_set(&mise.mesh), triangle_set(&dense.mesh));
}

#[test]
fn mise_with_zero_steps_is_dense() {
    let f = soft_sphere([0.5; 3], 0.25);
    let mise = mise_extract(&mut batch(&f), 16, 0, 0.5).unwrap();
    let dense = dense_extract(&mut batch(&f), 16, 0.5).unwrap();
    assert_eq!(mise.mesh, dense.mesh);
    assert_eq!(mise.evaluations, dense.evaluations);
}

#[test]
fn mise_filled_values_stay_on_their_side() {
    let f = soft_sphere([0.5; 3], 0.3);
    let out = mise_extract(&mut batch(&f), 8, 2, 0.5).unwrap();
    let g = &out.grid;
    for i in 0..=32 {
        for j in 0..=32 {
            for k in 0..=32 {
                let v = g.value([i, j, k]);
                assert_eq!(v >= 0.5, f(g.point([i, j, k])) >= 0.5);
            }
        }
    }
}

#[test]
fn mise_rejects_tiny_initial_lattice() {
    assert!(mise_extract(&mut batch(|_| 0.0), 1, 2, 0.5).is_err());
}

// ----------------------------------------------------------------------- OBJ

#[test]
fn sig9_formatting() {
    assert_eq!(sig9(0.5), "0.5");
    assert_eq!(sig9(0.0), "0");
    assert_eq!(sig9(1.0), "1");
    assert_eq!(sig9(0.123_456_789_123), "0.123456789");
    assert_eq!(sig9(0.001_234_567_891_2), "0.00123456789");
    assert_eq!(sig9(-0.25), "-0.25");
    assert_eq!(sig9(1e-9), "1.00000000e-9");
}

#[test]
fn obj_round_trip_to_printed_precision() {
    let g = ScalarGrid::from_fn(16, soft_sphere([0.5; 3], 0.3)).unwrap();
    let m = marching_cubes(&g, 0.5).unwrap();
    let back = Mesh::from_obj(&m.to_obj()).unwrap();
    assert_eq!(back.triangles, m.triangles);
    assert_eq!(back.vertices.len(), m.vertices.len());
    for (a, b) in back.vertices.iter().zip(&m.vertices) {
        for d in 0..3 {
            assert!((a[d] - b[d]).abs() <= 5e-9 * b[d].abs().max(1e-300));
        }
    }
    assert_eq!(back.to_obj(), m.to_obj());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.obj");
    write_obj(&m, &path).unwrap();
    assert_eq!(read_obj(&path).unwrap(), back);
}

#[test]
fn obj_reader_accepts_polygons_and_rejects_bad_indices() {
    let quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\n";
    let m = Mesh::from_obj(quad).unwrap();
    assert_eq!(m.triangles, vec![[0, 1, 2], [0, 2, 3]]);
    assert!(Mesh::from_obj("v 0 0 0\nf 1 2 3\n").is_err());
    assert!(Mesh::from_obj("v 0 0\n").is_err());
    assert!(Mesh::from_obj("v 0 0 0\nf 0 1 1\n").is_err());
}
