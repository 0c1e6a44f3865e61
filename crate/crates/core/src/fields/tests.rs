use proptest::prelude::*;

use super::*;

fn sphere() -> ShapeSpec {
    ShapeSpec::Sphere {
        center: [0.5; 3],
        radius: 0.25,
    }
}

fn brute_force_mask(qs: &QuerySet, r: f64) -> Vec<bool> {
    (0..qs.len())
        .map(|i| (0..qs.len()).any(|j| qs.labels[i] != qs.labels[j] && dist2(qs.coords[i], qs.coords[j]) <= r * r))
        .collect()
}

#[test]
fn occupancy_examples() {
    let s = sphere();
    assert!(analytic_occupancy(&s, [0.5; 3]).unwrap());
    assert!(!analytic_occupancy(&s, [0.9, 0.5, 0.5]).unwrap());
    // surface counts as inside
    assert!(analytic_occupancy(&s, [0.75, 0.5, 0.5]).unwrap());
    let u = ShapeSpec::Union(vec![
        s,
        ShapeSpec::Box {
            center: [0.8, 0.8, 0.8],
            half_extents: [0.1; 3],
        },
    ]);
    assert!(analytic_occupancy(&u, [0.85, 0.85, 0.85]).unwrap());
    assert!(matches!(analytic_occupancy(&u, [0.5, 1.2, 0.5]), Err(Error::Domain(_))));
}

#[test]
fn torus_occupancy_and_sdf() {
    let t = ShapeSpec::Torus {
        center: [0.5; 3],
        major: 0.25,
        minor: 0.08,
    };
    t.validate().unwrap();
    assert!(!analytic_occupancy(&t, [0.5; 3]).unwrap());
    assert!(analytic_occupancy(&t, [0.75, 0.5, 0.5]).unwrap());
    assert!((t.sdf([0.75, 0.5, 0.6]) - 0.02).abs() < 1e-12);
}

#[test]
fn padding_is_enforced() {
    let too_big = ShapeSpec::Sphere {
        center: [0.5; 3],
        radius: 0.46,
    };
    assert!(too_big.validate().is_err());
    assert!(sample_surface(&too_big, 10, 0.0, 0).is_err());
    assert!(ShapeSpec::toy_scene().validate().is_ok());
}

#[test]
fn noiseless_sphere_samples_lie_on_surface() {
    let pb = sample_surface(&sphere(), 3000, 0.0, 1).unwrap();
    assert_eq!(pb.len(), 3000);
    for p in &pb.coords {
        assert!((norm(sub(*p, [0.5; 3])) - 0.25).abs() < 1e-9);
    }
}

#[test]
fn noiseless_samples_of_every_primitive_lie_on_surface() {
    for s in [
        ShapeSpec::Box {
            center: [0.5; 3],
            half_extents: [0.2, 0.1, 0.3],
        },
        ShapeSpec::Torus {
            center: [0.5; 3],
            major: 0.3,
            minor: 0.1,
        },
        ShapeSpec::toy_scene(),
    ] {
        let pb = sample_surface(&s, 2000, 0.0, 2).unwrap();
        for (p, n) in pb.coords.iter().zip(pb.normals.as_ref().unwrap()) {
            assert!(s.sdf(*p).abs() < 1e-9, "{s:?} {p:?}");
            assert!((norm(*n) - 1.0).abs() < 1e-12);
            // stepping along the normal leaves the solid
            let out: [f64; 3] = std::array::from_fn(|i| p[i] + 1e-4 * n[i]);
            assert!(s.sdf(out) > 0.0);
        }
    }
}

#[test]
fn noise_stddev_matches_sigma() {
    let pb = sample_surface(&sphere(), 100_000, 0.005, 3).unwrap();
    let d: Vec<f64> = pb.coords.iter().map(|p| norm(sub(*p, [0.5; 3])) - 0.25).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
    assert!((var.sqrt() - 0.005).abs() < 0.05 * 0.005, "sd {}", var.sqrt());
}

#[test]
fn union_samples_are_area_weighted_over_visible_surface() {
    // two disjoint unit-ish spheres with areas in ratio 4:1
    let u = ShapeSpec::Union(vec![
        ShapeSpec::Sphere {
            center: [0.3, 0.5, 0.5],
            radius: 0.2,
        },
        ShapeSpec::Sphere {
            center: [0.8, 0.5, 0.5],
            radius: 0.1,
        },
    ]);
    let pb = sample_surface(&u, 50_000, 0.0, 4).unwrap();
    let big = pb.coords.iter().filter(|p| p[0] < 0.6).count() as f64 / 50_000.0;
    assert!((big - 0.8).abs() < 0.01, "{big}");
}

#[test]
fn queries_are_uniform_and_correctly_labelled() {
    let s = sphere();
    let qs = sample_queries(&s, 1_000_000, 5).unwrap();
    assert!(qs.coords.iter().flatten().all(|c| (0.0..=1.0).contains(c)));
    assert!(qs.boundary_mask.iter().all(|&b| !b));
    let inside = qs.labels.iter().filter(|&&l| l).count() as f64 / 1e6;
    let volume = 4.0 / 3.0 * PI * 0.25f64.powi(3);
    assert!((inside - volume).abs() < 0.02 * volume, "{inside}");
    for (q, l) in qs.coords.iter().zip(&qs.labels).take(10_000) {
        assert_eq!(analytic_occupancy(&s, *q).unwrap(), *l);
    }
}

#[test]
fn boundary_examples() {
    let same = QuerySet::new(vec![[0.1; 3], [0.12; 3]], vec![true, true]).unwrap();
    let r = extract_boundary(&same, 0.08).unwrap();
    assert_eq!(r.count, 0);
    assert!(r.no_opposite_pair);

    let near = QuerySet::new(vec![[0.5; 3], [0.55, 0.5, 0.5]], vec![true, false]).unwrap();
    assert_eq!(
        extract_boundary(&near, 0.08).unwrap().queries.boundary_mask,
        vec![true, true]
    );

    let far = QuerySet::new(vec![[0.5; 3], [0.59, 0.5, 0.5]], vec![true, false]).unwrap();
    let r = extract_boundary(&far, 0.08).unwrap();
    assert_eq!(r.queries.boundary_mask, vec![false, false]);
    assert!(r.no_opposite_pair);

    assert!(extract_boundary(&near, 0.0).is_err());
}

#[test]
fn boundary_matches_all_pairs_scan_on_2000_queries() {
    let qs = sample_queries(&ShapeSpec::toy_scene(), 2000, 6).unwrap();
    let r = extract_boundary(&qs, 0.08).unwrap();
    assert_eq!(r.queries.boundary_mask, brute_force_mask(&qs, 0.08));
    assert!(r.count > 0 && r.count < 2000);
}

#[test]
fn boundary_subset_keeps_masked_rows() {
    let qs = sample_queries(&sphere(), 500, 7).unwrap();
    let r = extract_boundary(&qs, 0.08).unwrap().queries;
    let sub = r.boundary_subset();
    assert_eq!(sub.len(), r.boundary_mask.iter().filter(|&&b| b).count());
    let both = sub.labels.iter().any(|&l| l) && sub.labels.iter().any(|&l| !l);
    assert!(both);
}

#[test]
fn point_batch_cell_ids_follow_floor_rule() {
    let pb = PointBatch::new(vec![[0.0; 3], [1.0; 3], [0.26, 0.74, 0.5]]).unwrap();
    assert_eq!(pb.cell_ids(4), vec![0, 63, (4 + 2) * 4 + 2]);
    assert!(PointBatch::new(vec![]).is_err());
}

#[test]
fn derived_seeds_differ_by_stream() {
    assert_ne!(derive_seed(1, 1), derive_seed(1, 2));
    assert_eq!(derive_seed(4, 3), derive_seed(4, 3));
}

fn labelled_cloud() -> impl Strategy<Value = QuerySet> {
    prop::collection::vec(((0.0..1.0, 0.0..1.0, 0.0..1.0), any::<bool>()), 1..120).prop_map(|v| {
        let coords = v.iter().map(|((x, y, z), _)| [*x, *y, *z]).collect();
        let labels = v.iter().map(|(_, l)| *l).collect();
        QuerySet::new(coords, labels).unwrap()
    })
}

proptest! {
    #[test]
    fn boundary_equals_brute_force(qs in labelled_cloud(), r in 0.01f64..0.5) {
        prop_assert_eq!(extract_boundary(&qs, r).unwrap().queries.boundary_mask, brute_force_mask(&qs, r));
    }

    #[test]
    fn boundary_is_monotone_in_radius(qs in labelled_cloud(), a in 0.01f64..0.3, extra in 0.0f64..0.3) {
        let small = extract_boundary(&qs, a).unwrap().queries.boundary_mask;
        let large = extract_boundary(&qs, a + extra).unwrap().queries.boundary_mask;
        for (s, l) in small.iter().zip(&large) {
            prop_assert!(!s || *l);
        }
    }

    #[test]
    fn boundary_pairs_are_symmetric(qs in labelled_cloud(), r in 0.01f64..0.5) {
        // any boundary point has a partner that is itself boundary
        let mask = extract_boundary(&qs, r).unwrap().queries.boundary_mask;
        for i in (0..qs.len()).filter(|&i| mask[i]) {
            let partner = (0..qs.len()).find(|&j| {
                qs.labels[i] != qs.labels[j] && dist2(qs.coords[i], qs.coords[j]) <= r * r
            });
            prop_assert!(mask[partner.unwrap()]);
        }
    }

    #[test]
    fn samplers_are_reproducible(seed in any::<u64>(), sigma in 0.0f64..0.02) {
        let s = ShapeSpec::toy_scene();
        prop_assert_eq!(sample_surface(&s, 50, sigma, seed).unwrap(), sample_surface(&s, 50, sigma, seed).unwrap());
        prop_assert_eq!(sample_queries(&s, 50, seed).unwrap(), sample_queries(&s, 50, seed).unwrap());
    }

    #[test]
    fn noisy_samples_stay_in_cube(seed in any::<u64>()) {
        let pb = sample_surface(&ShapeSpec::toy_scene(), 100, 0.2, seed).unwrap();
        prop_assert!(pb.coords.iter().flatten().all(|c| (0.0..=1.0).contains(c)));
    }
}
