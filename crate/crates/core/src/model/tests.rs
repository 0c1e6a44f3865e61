use proptest::prelude::*;
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::tensor::gradcheck::weighted_sum;
use crate::tensor::{gradcheck, FeatureGrid};

fn tiny_config() -> ModelConfig {
    ModelConfig {
        base_resolution: 4,
        channels: 3,
        unet_depth: 4,
        depthwise_last_k: 3,
        enable_downsampling: true,
        projection_dim: 4,
        decoder_hidden: 8,
        decoder_blocks: 2,
        attention: AttentionKind::Vector,
        feature_combine: FeatureCombine::Sum,
    }
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 3]> {
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.random_range(0.0..1.0)))
        .collect()
}

/// Initialized parameters with the zero-initialized output layer replaced
/// by random values, so gradients reach every group.
fn live_params(cfg: &ModelConfig, seed: u64) -> ModelParams {
    let mut p = ModelParams::init(cfg, seed).unwrap();
    let out = p.layout().decoder.fc_out;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf00d);
    for slot in [out.w, out.b] {
        for v in p.tensors_mut()[slot].data_mut() {
            *v = rng.random_range(-0.5..0.5);
        }
    }
    p
}

// ---------------------------------------------------------------- config

#[test]
fn config_contract() {
    assert!(ModelConfig::default().validate().is_ok());
    let odd = ModelConfig {
        base_resolution: 6,
        ..ModelConfig::default()
    };
    assert!(odd.validate().is_err());
    assert!(ModelConfig {
        enable_downsampling: false,
        ..odd
    }
    .validate()
    .is_ok());
    assert!(ModelConfig {
        channels: 0,
        ..ModelConfig::default()
    }
    .validate()
    .is_err());
    let cfg = ModelConfig::default();
    assert_eq!(cfg.num_layers(), 7);
    assert_eq!(
        (0..7).map(|i| cfg.layer_level(i)).collect::<Vec<_>>(),
        [0, 1, 2, 3, 2, 1, 0]
    );
    assert_eq!(
        (0..4).map(|l| cfg.level_resolution(l)).collect::<Vec<_>>(),
        [32, 32, 16, 8]
    );
    let dw: Vec<bool> = (0..7).map(|i| cfg.layer_conv_mode(i) == ConvMode::Depthwise).collect();
    assert_eq!(dw, [false, false, false, false, true, true, true]);
}

#[test]
fn parameter_count_is_a_function_of_config() {
    let cfg = tiny_config();
    let a = ModelParams::init(&cfg, 1).unwrap();
    let b = ModelParams::init(&cfg, 2).unwrap();
    assert_eq!(a.num_scalars(), b.num_scalars());
    assert_eq!(a.names(), b.names());
    assert_ne!(a.tensors(), b.tensors());
    assert_eq!(a, ModelParams::init(&cfg, 1).unwrap());
    // every symbol maps to a named group
    for group in [
        "phi_point",
        "phi_pos",
        "phi_q",
        "phi_v",
        "phi_w",
        "psi_k",
        "grid_agg",
        "proj",
        "decoder",
    ] {
        assert!(a.names().iter().any(|n| n.contains(group)), "{group}");
    }
    let out = a.get("decoder.fc_out.weight").unwrap();
    assert!(out.data().iter().all(|&v| v == 0.0));
    let c = cfg.channels;
    assert_eq!(a.get("layer0.psi_k.weight").unwrap().shape(), [27 * c, c]);
    assert_eq!(a.get("layer6.grid_agg.weight").unwrap().shape(), [27, c]);
}

// -------------------------------------------------------------- localize

#[test]
fn localize_examples() {
    let l = localize([0.53, 0.2, 0.9], 10).unwrap();
    assert!((l[0] - 0.03).abs() < 1e-12);
    assert_eq!(localize([0.25, 0.5, 0.75], 4).unwrap(), [0.0; 3]);
    assert!((localize([1.0, 0.0, 0.0], 4).unwrap()[0] - 0.25).abs() < 1e-15);
    assert!(matches!(localize([0.5, 1.5, 0.5], 4), Err(Error::Domain(_))));
}

#[test]
fn localize_range_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for res in [1, 3, 7, 10, 32] {
        for _ in 0..10_000 {
            let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
            let l = localize(p, res).unwrap();
            assert!(l.iter().all(|&c| (0.0..1.0 / res as f64).contains(&c)), "{p:?} {l:?}");
        }
    }
}

proptest! {
    #[test]
    fn localize_agrees_with_cell_of(x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0, res in 1usize..64) {
        let p = [x, y, z];
        let l = localize(p, res).unwrap();
        let cell = crate::tensor::cell_of(p, res).unwrap();
        let (i, j, k) = (cell / (res * res), (cell / res) % res, cell % res);
        let h = 1.0 / res as f64;
        prop_assert!(l.iter().all(|&c| c >= 0.0 && c < h));
        prop_assert_eq!(p[0] - l[0], i as f64 / res as f64);
        prop_assert_eq!(p[1] - l[1], j as f64 / res as f64);
        prop_assert_eq!(p[2] - l[2], k as f64 / res as f64);
    }
}

// ------------------------------------------------------- position encoding

#[test]
fn position_encoding_is_deterministic_with_width_c() {
    let params = ModelParams::init(&tiny_config(), 3).unwrap();
    let run = || {
        let mut t = Tape::new();
        let p = params.bind(&mut t, false);
        let local = t.constant(Tensor::from_rows(&[[0.1, 0.2, 0.05], [0.0, 0.0, 0.0]]));
        let e = position_encoding(&mut t, &p, params.layout().layers[0].phi_pos, local).unwrap();
        t.value(e).clone()
    };
    let a = run();
    assert_eq!(a.shape(), [2, 3]);
    assert_eq!(a, run());
}

#[test]
fn position_encoding_gradcheck_wrt_phi_pos() {
    let params = ModelParams::init(&tiny_config(), 4).unwrap();
    let slots = params.layout().layers[2].phi_pos;
    let ids = [slots.l1.w, slots.l1.b, slots.l2.w, slots.l2.b];
    let inputs: Vec<Tensor> = ids.iter().map(|&i| params.tensors()[i].clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let local = Tensor::new(vec![6, 3], (0..18).map(|_| rng.random_range(0.0..0.25)).collect()).unwrap();
    let r = gradcheck(
        |t, v| {
            let mut p = vec![v[0]; params.tensors().len()];
            for (k, &i) in ids.iter().enumerate() {
                p[i] = v[k];
            }
            let l = t.constant(local.clone());
            let e = position_encoding(t, &p, slots, l)?;
            weighted_sum(t, e, 1)
        },
        &inputs,
        1e-5,
    )
    .unwrap();
    assert!(r.max_rel_err < 1e-6, "{r:?}");
}

// -------------------------------------------------------------- one layer

struct LayerFixture {
    params: ModelParams,
    cloud: PreparedCloud,
    grid: Tensor,
    feats: Tensor,
}

fn layer_fixture(points: Vec<[f64; 3]>, seed: u64) -> LayerFixture {
    let cfg = tiny_config();
    let params = ModelParams::init(&cfg, seed).unwrap();
    let cloud = PreparedCloud::for_model(&points, &params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    let c = cfg.channels;
    let grid = Tensor::new(vec![64, c], (0..64 * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let n = cloud.len();
    let feats = Tensor::new(vec![n, c], (0..n * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    LayerFixture {
        params,
        cloud,
        grid,
        feats,
    }
}

/// Attention output of layer 0 for a fixture.
fn attend(fx: &LayerFixture, feats: &Tensor) -> (Tensor, Tensor, Tensor) {
    let mut t = Tape::new();
    let p = fx.params.bind(&mut t, false);
    let layer = &fx.params.layout().layers[0];
    let level = fx.cloud.level(layer.res).unwrap();
    let local = t.constant(level.local.clone());
    let fpos = position_encoding(&mut t, &p, layer.phi_pos, local).unwrap();
    let g = t.constant(fx.grid.clone());
    let f = t.constant(feats.clone());
    let (out, v, _) = point_grid_attention(&mut t, &p, layer, AttentionKind::Vector, g, f, fpos, level).unwrap();
    (t.value(out).clone(), t.value(v).clone(), t.value(fpos).clone())
}

#[test]
fn singleton_cell_receives_value_plus_encoding() {
    let fx = layer_fixture(vec![[0.1, 0.1, 0.1], [0.9, 0.6, 0.3]], 6);
    let (out, v, fpos) = attend(&fx, &fx.feats);
    let level = fx.cloud.level(4).unwrap();
    for (j, &cell) in level.cells.iter().enumerate() {
        for ch in 0..3 {
            let expect = fx.grid.row(cell)[ch] + v.row(j)[ch] + fpos.row(j)[ch];
            assert!((out.row(cell)[ch] - expect).abs() < 1e-14);
        }
    }
    // empty cells keep their incoming feature
    let empty = (0..64).find(|c| !level.cells.contains(c)).unwrap();
    assert_eq!(out.row(empty), fx.grid.row(empty));
}

#[test]
fn duplicate_points_collapse_to_one() {
    let single = layer_fixture(vec![[0.3, 0.3, 0.3]], 7);
    let double = layer_fixture(vec![[0.3, 0.3, 0.3], [0.3, 0.3, 0.3]], 7);
    let mut feats2 = Tensor::zeros(vec![2, 3]);
    feats2.data_mut()[..3].copy_from_slice(single.feats.row(0));
    feats2.data_mut()[3..].copy_from_slice(single.feats.row(0));
    let double = LayerFixture {
        grid: single.grid.clone(),
        ..double
    };
    let (a, _, _) = attend(&single, &single.feats);
    let (b, _, _) = attend(&double, &feats2);
    for (x, y) in a.data().iter().zip(b.data()) {
        assert!((x - y).abs() < 1e-14);
    }
}

#[test]
fn grid_aggregate_dirac_doubles_and_depthwise_separates_channels() {
    let cfg = tiny_config();
    let mut params = ModelParams::init(&cfg, 8).unwrap();
    let full = params.layout().layers[0];
    let dw = params.layout().layers[6];
    let c = cfg.channels;
    {
        let t = params.tensors_mut();
        t[full.grid_agg.w].data_mut().fill(0.0);
        t[full.grid_agg.b].data_mut().fill(0.0);
        for ch in 0..c {
            t[full.grid_agg.w].data_mut()[(13 * c + ch) * c + ch] = 1.0;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = Tensor::new(vec![64, c], (0..64 * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let run = |params: &ModelParams, layer: &LayerSlots, x: &Tensor| {
        let mut t = Tape::new();
        let p = params.bind(&mut t, false);
        let g = t.constant(x.clone());
        let y = grid_aggregate(&mut t, &p, layer, g).unwrap();
        t.value(y).clone()
    };
    let y = run(&params, &full, &x);
    for (a, b) in y.data().iter().zip(x.data()) {
        assert_eq!(*a, 2.0 * b);
    }
    // perturb channel 1 only; channel 0 of a depthwise layer must not move
    let base = run(&params, &dw, &x);
    let mut x2 = x.clone();
    for cell in 0..64 {
        x2.data_mut()[cell * c + 1] += 0.5;
    }
    let moved = run(&params, &dw, &x2);
    for cell in 0..64 {
        assert_eq!(base.row(cell)[0], moved.row(cell)[0]);
        assert_ne!(base.row(cell)[1], moved.row(cell)[1]);
    }
}

#[test]
fn point_update_with_identity_values_adds_constant() {
    let cfg = tiny_config();
    let mut params = ModelParams::init(&cfg, 10).unwrap();
    let v = params.layout().layers[0].phi_v;
    let c = cfg.channels;
    for lin in [v.l1, v.l2] {
        let t = params.tensors_mut();
        t[lin.b].data_mut().fill(0.0);
        let w = t[lin.w].data_mut();
        w.fill(0.0);
        for ch in 0..c {
            w[ch * c + ch] = 1.0;
        }
    }
    let feats = Tensor::from_rows(&[[0.5, 1.0, 0.25], [2.0, 0.0, 0.125]]);
    let coords = [[0.2, 0.4, 0.6], [1.0, 0.0, 0.5]];
    let mut t = Tape::new();
    let p = params.bind(&mut t, false);
    let f = t.constant(feats.clone());
    let vv = mlp(&mut t, &p, v, f).unwrap();
    let g = t.constant(FeatureGrid::constant(4, c, 0.75).to_tensor());
    let out = point_update(&mut t, f, vv, g, 4, &coords).unwrap();
    let out = t.value(out);
    assert_eq!(out.shape(), [2, 3]);
    for (o, f) in out.data().iter().zip(feats.data()) {
        assert!((o - (2.0 * f + 0.75)).abs() < 1e-15);
    }
}

#[test]
fn full_layer_gradcheck() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fx = layer_fixture(random_cloud(&mut rng, 6), 12);
    let layer = fx.params.layout().layers[0];
    let groups = [layer.phi_pos, layer.phi_q, layer.phi_v, layer.phi_w];
    let mut ids: Vec<usize> = groups.iter().flat_map(|m| [m.l1.w, m.l1.b, m.l2.w, m.l2.b]).collect();
    ids.extend([layer.psi_k.w, layer.psi_k.b, layer.grid_agg.w, layer.grid_agg.b]);
    let mut inputs: Vec<Tensor> = ids.iter().map(|&i| fx.params.tensors()[i].clone()).collect();
    inputs.push(fx.grid.clone());
    inputs.push(fx.feats.clone());
    let r = gradcheck(
        |t, v| {
            let mut p = vec![v[0]; fx.params.tensors().len()];
            for (k, &i) in ids.iter().enumerate() {
                p[i] = v[k];
            }
            let (g, f) = (v[ids.len()], v[ids.len() + 1]);
            let level = fx.cloud.level(4)?;
            let local = t.constant(level.local.clone());
            let fpos = position_encoding(t, &p, layer.phi_pos, local)?;
            let (g1, vv, _) = point_grid_attention(t, &p, &layer, AttentionKind::Vector, g, f, fpos, level)?;
            let g2 = grid_aggregate(t, &p, &layer, g1)?;
            let f2 = point_update(t, f, vv, g2, 4, fx.cloud.coords())?;
            let a = weighted_sum(t, g2, 2)?;
            let b = weighted_sum(t, f2, 3)?;
            t.add(a, b)
        },
        &inputs,
        1e-5,
    )
    .unwrap();
    assert!(r.max_rel_err < 1e-4, "{r:?}");
}

// ----------------------------------------------------------------- encode

#[test]
fn encoder_output_resolutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let pts = random_cloud(&mut rng, 40);
    let cfg = ModelConfig {
        base_resolution: 8,
        channels: 2,
        ..tiny_config()
    };
    let field = encode(&ModelParams::init(&cfg, 1).unwrap(), &pts).unwrap();
    assert_eq!(field.resolutions(), [8, 8, 4]);
    let flat = ModelConfig {
        enable_downsampling: false,
        ..cfg
    };
    let field = encode(&ModelParams::init(&flat, 1).unwrap(), &pts).unwrap();
    assert_eq!(field.resolutions(), [8, 8, 8]);
    assert!(matches!(
        encode(&ModelParams::init(&flat, 1).unwrap(), &[]),
        Err(Error::Contract(_))
    ));
}

#[test]
fn encoder_is_bitwise_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cfg = ModelConfig {
        base_resolution: 8,
        channels: 4,
        ..tiny_config()
    };
    let params = ModelParams::init(&cfg, 2).unwrap();
    for _ in 0..5 {
        let mut pts = random_cloud(&mut rng, 50);
        let a = encode(&params, &pts).unwrap();
        pts.shuffle(&mut rng);
        let b = encode(&params, &pts).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn duplicated_points_leave_scatter_mean_init_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let params = ModelParams::init(&tiny_config(), 3).unwrap();
    let pts = random_cloud(&mut rng, 30);
    let doubled: Vec<[f64; 3]> = pts.iter().chain(&pts).copied().collect();
    let init = |pts: &[[f64; 3]]| {
        let cloud = PreparedCloud::for_model(pts, &params).unwrap();
        let mut t = Tape::new();
        let p = params.bind(&mut t, false);
        let enc = encode_on_tape(&mut t, &params, &p, &cloud).unwrap();
        t.value(enc.initial_grid).clone()
    };
    for (a, b) in init(&pts).data().iter().zip(init(&doubled).data()) {
        assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
    }
}

#[test]
fn attention_weights_normalize_per_cell_and_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for attention in [AttentionKind::Vector, AttentionKind::Scalar] {
        let cfg = ModelConfig {
            base_resolution: 8,
            channels: 4,
            attention,
            ..tiny_config()
        };
        let params = ModelParams::init(&cfg, 4).unwrap();
        for _ in 0..10 {
            let pts = random_cloud(&mut rng, 80);
            let cloud = PreparedCloud::for_model(&pts, &params).unwrap();
            let mut t = Tape::new();
            let p = params.bind(&mut t, false);
            let enc = encode_on_tape(&mut t, &params, &p, &cloud).unwrap();
            assert_eq!(enc.trace.len(), 7);
            for tr in &enc.trace {
                let level = cloud.level(tr.res).unwrap();
                let w = t.value(tr.weights);
                let mut sums = vec![0.0; level.sites.len() * 4];
                for (j, &s) in level.slot.iter().enumerate() {
                    for ch in 0..4 {
                        assert!(w.row(j)[ch] >= 0.0);
                        sums[s * 4 + ch] += w.row(j)[ch];
                    }
                }
                assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-6));
            }
        }
    }
}

// ----------------------------------------------------------------- decode

#[test]
fn zero_output_layer_gives_half_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let params = ModelParams::init(&tiny_config(), 5).unwrap();
    let field = encode(&params, &random_cloud(&mut rng, 20)).unwrap();
    let q = random_cloud(&mut rng, 50);
    let logits = decode(&params, &field, &q, 1).unwrap();
    assert!(logits.iter().all(|&l| occupancy_probability(l) == 0.5));
}

#[test]
fn decode_is_deterministic_and_thread_count_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let params = live_params(&tiny_config(), 6);
    let field = encode(&params, &random_cloud(&mut rng, 20)).unwrap();
    let mut q = random_cloud(&mut rng, 9000);
    q[1] = q[0];
    let a = decode(&params, &field, &q, 1).unwrap();
    assert_eq!(a[0], a[1]);
    assert_eq!(a, decode(&params, &field, &q, 3).unwrap());
    assert!(matches!(
        decode(&params, &field, &[[0.5, 0.5, -0.1]], 1),
        Err(Error::Domain(_))
    ));
}

#[test]
fn decode_gradcheck_wrt_decoder_params_and_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for combine in [FeatureCombine::Sum, FeatureCombine::Concat] {
        let cfg = ModelConfig {
            feature_combine: combine,
            ..tiny_config()
        };
        let params = live_params(&cfg, 7);
        let field = encode(&params, &random_cloud(&mut rng, 20)).unwrap();
        let q = random_cloud(&mut rng, 6);
        let d = &params.layout().decoder;
        let mut ids: Vec<usize> = d.proj.iter().flat_map(|m| [m.l1.w, m.l1.b, m.l2.w, m.l2.b]).collect();
        ids.extend([d.fc_p.w, d.fc_p.b, d.fc_out.w, d.fc_out.b]);
        for b in &d.blocks {
            ids.extend([b.fc_c.w, b.fc_c.b, b.fc_0.w, b.fc_0.b, b.fc_1.w, b.fc_1.b]);
        }
        let mut inputs: Vec<Tensor> = ids.iter().map(|&i| params.tensors()[i].clone()).collect();
        inputs.extend(field.grids.iter().map(FeatureGrid::to_tensor));
        let r = gradcheck(
            |t, v| {
                let mut p = vec![v[0]; params.tensors().len()];
                for (k, &i) in ids.iter().enumerate() {
                    p[i] = v[k];
                }
                let n = ids.len();
                let grids = [0, 1, 2].map(|k| (v[n + k], field.grids[k].res()));
                let out = decode_on_tape(t, &params, &p, &grids, &q)?;
                weighted_sum(t, out, 4)
            },
            &inputs,
            1e-5,
        )
        .unwrap();
        assert!(r.max_rel_err < 1e-4, "{combine:?}: {r:?}");
    }
}

#[test]
fn occupancy_probability_values() {
    assert_eq!(occupancy_probability(0.0), 0.5);
    for l in [0.3, 2.0, 17.0, -40.0] {
        assert!((occupancy_probability(l) + occupancy_probability(-l) - 1.0).abs() < 1e-12);
    }
    // 1 / (1 + e^-3) to ten digits
    assert!((occupancy_probability(3.0) - 0.952_574_126_8).abs() < 1e-10);
}

#[test]
fn end_to_end_gradcheck_on_five_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let params = live_params(&tiny_config(), 8);
    let pts = random_cloud(&mut rng, 5);
    let cloud = PreparedCloud::for_model(&pts, &params).unwrap();
    let q = random_cloud(&mut rng, 8);
    let r = gradcheck(
        |t, v| {
            let enc = encode_on_tape(t, &params, v, &cloud)?;
            let out = decode_on_tape(t, &params, v, &enc.grids, &q)?;
            weighted_sum(t, out, 5)
        },
        params.tensors(),
        1e-5,
    )
    .unwrap();
    assert!(r.max_rel_err < 1e-3, "{r:?}");
}

#[test]
fn zeroed_encoder_makes_decode_independent_of_the_cloud() {
    let cfg = tiny_config();
    let mut params = live_params(&cfg, 9);
    let layout = params.layout().clone();
    let mut zero = |i: usize| params.tensors_mut()[i].data_mut().fill(0.0);
    for m in [layout.phi_point] {
        for i in [m.l1.w, m.l1.b, m.l2.w, m.l2.b] {
            zero(i);
        }
    }
    for l in &layout.layers {
        for m in [l.phi_pos, l.phi_q, l.phi_v, l.phi_w] {
            for i in [m.l1.w, m.l1.b, m.l2.w, m.l2.b] {
                zero(i);
            }
        }
        for i in [l.psi_k.w, l.psi_k.b, l.grid_agg.w, l.grid_agg.b] {
            zero(i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let q = random_cloud(&mut rng, 30);
    let a = decode(&params, &encode(&params, &random_cloud(&mut rng, 10)).unwrap(), &q, 1).unwrap();
    let b = decode(&params, &encode(&params, &random_cloud(&mut rng, 25)).unwrap(), &q, 1).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().any(|&l| l != a[0]), "coordinate pathway still varies with q");
}

// ------------------------------------------------------------- checkpoint

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    for cfg in [
        tiny_config(),
        ModelConfig {
            attention: AttentionKind::Scalar,
            feature_combine: FeatureCombine::Concat,
            enable_downsampling: false,
            ..tiny_config()
        },
    ] {
        let mut ck = Checkpoint::new(live_params(&cfg, 10));
        ck.extra.push(("adam.step".into(), Tensor::scalar(12.0)));
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        let back = Checkpoint::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, ck);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(buf, again);
    }
    assert!(Checkpoint::read_from(&mut &b"GFDS"[..]).is_err());
}
