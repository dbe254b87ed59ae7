//! End-to-end exercises of the public library surface: train on synthetic
//! data, persist and reload artifacts, estimate hardware cost, and sweep a
//! small grid. Everything here goes through the crate root exactly as an
//! external consumer would.

use qdse_core::dataio::{split, synthetic_blobs, Dataset};
use qdse_core::explorer::{
    export, import_points, pareto_front, run_grid, DesignPoint, ExportFormat, GridSpec,
    PointObjective, TrainPolicy,
};
use qdse_core::hwmodel::{memory_bits, throughput_fps, CostMode, HardwareModel};
use qdse_core::quantize::Precision;
use qdse_core::rng::Rng;
use qdse_core::topology::{reference_by_name, reference_fc, Activation, TopologySpec};
use qdse_core::trainer::{
    evaluate, fit, load_checkpoint, save_checkpoint, TrainConfig,
};
use qdse_core::Error;

/// A small labeled blob problem, split into train and test halves.
fn blob_data(seed: u64, n: usize) -> (Dataset, Dataset) {
    let mut rng = Rng::new(seed);
    let full = synthetic_blobs(&mut rng, n, 10, 784, 6.0).expect("synthetic data");
    split(&full, 0.75, &mut rng).expect("split")
}

fn quick_config(precision: &str, seed: u64) -> TrainConfig {
    let mut cfg = TrainConfig::for_precision(precision.parse().expect("precision"));
    cfg.epochs = 2;
    cfg.batch_size = 20;
    cfg.with_seed(seed)
}

#[test]
fn train_checkpoint_reload_roundtrip() {
    let (train_set, test_set) = blob_data(9, 400);
    let topo = reference_fc(0.03125).unwrap();
    let cfg = quick_config("int4", 9);
    let (model, metrics) = fit(&cfg, &topo, &train_set, &test_set).unwrap();
    assert_eq!(metrics.len(), cfg.epochs);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    save_checkpoint(&model, &path).unwrap();
    let reloaded = load_checkpoint(&path).unwrap();

    assert_eq!(reloaded, model, "reloaded state must be bit-identical");
    let before = evaluate(&model, &test_set).unwrap();
    let after = evaluate(&reloaded, &test_set).unwrap();
    assert_eq!(before, after);
    assert_eq!(before, metrics.last().unwrap().valid_error);
}

#[test]
fn corrupted_checkpoint_version_is_rejected() {
    let (train_set, test_set) = blob_data(10, 200);
    let topo = reference_fc(0.03125).unwrap();
    let (model, _) = fit(&quick_config("fp32", 10), &topo, &train_set, &test_set).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    save_checkpoint(&model, &path).unwrap();

    // Bytes 4..8 hold the little-endian format version; claim a future one.
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[4..8].copy_from_slice(&u32::MAX.to_le_bytes());
    std::fs::write(&path, &bytes).unwrap();

    match load_checkpoint(&path) {
        Err(Error::VersionMismatch { found, .. }) => assert_eq!(found, u32::MAX),
        other => panic!("expected a version mismatch, got {other:?}"),
    }
}

#[test]
fn training_is_a_pure_function_of_seed() {
    let (train_set, test_set) = blob_data(4, 300);
    let topo = reference_fc(0.03125).unwrap();

    let (model_a, metrics_a) = fit(&quick_config("int2", 4), &topo, &train_set, &test_set).unwrap();
    let (model_b, metrics_b) = fit(&quick_config("int2", 4), &topo, &train_set, &test_set).unwrap();
    assert_eq!(model_a, model_b);
    for (a, b) in metrics_a.iter().zip(&metrics_b) {
        assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits());
        assert_eq!(a.valid_error.to_bits(), b.valid_error.to_bits());
    }

    let (_, metrics_c) = fit(&quick_config("int2", 5), &topo, &train_set, &test_set).unwrap();
    assert_ne!(
        metrics_a.last().unwrap().train_loss.to_bits(),
        metrics_c.last().unwrap().train_loss.to_bits(),
        "a different seed should follow a different trajectory"
    );
}

#[test]
fn estimates_agree_with_the_free_functions() {
    let hw = HardwareModel::default();
    let topo = reference_fc(0.25).unwrap();
    let delta = 0.5;
    for name in ["binary", "int2", "int4", "int8", "int16", "fp32"] {
        let p: Precision = name.parse().unwrap();
        let est = hw.estimate(&topo, p, delta, CostMode::Average).unwrap();
        assert_eq!(est.num_ops, topo.count_ops());
        assert_eq!(est.num_params, topo.count_params());
        assert_eq!(est.memory_bits, memory_bits(&topo, p));
        assert_eq!(est.c_avg, hw.c_avg(p).unwrap());
        assert_eq!(
            est.throughput_fps,
            throughput_fps(est.num_ops, est.c_avg, hw.device.clock_hz, delta).unwrap()
        );
        assert_eq!(est.c_rel, hw.c_rel(p, Precision::Binary).unwrap());
    }

    // Storage cost is monotone in word length for a fixed topology.
    let bits: Vec<u64> = ["binary", "int2", "int4", "int8", "int16", "fp32"]
        .iter()
        .map(|n| memory_bits(&topo, n.parse().unwrap()))
        .collect();
    assert!(bits.windows(2).all(|w| w[0] < w[1]), "{bits:?}");
}

#[test]
fn estimate_only_grid_covers_every_point_and_roundtrips() {
    let hw = HardwareModel::default();
    let mut spec = GridSpec::new("fc");
    spec.precisions = vec![Precision::Binary, Precision::Float32];
    spec.scales = vec![0.25, 1.0];
    spec.train = TrainPolicy::Never;

    let points = run_grid(&spec, &hw, None).unwrap();
    assert_eq!(points.len(), 4);
    assert!(points.iter().all(|p| p.test_error.is_none() && p.epochs == 0));

    let objectives = [PointObjective::MemoryBits, PointObjective::ThroughputFps];
    let front = pareto_front(&points, &objectives).unwrap();
    assert!(!front.is_empty());

    let dir = tempfile::tempdir().unwrap();
    for format in [ExportFormat::Csv, ExportFormat::Json] {
        let path = dir.path().join(match format {
            ExportFormat::Csv => "grid.csv",
            ExportFormat::Json => "grid.json",
        });
        export(&points, Some(&front), &path, format).unwrap();
        let back = import_points(&path, format).unwrap();
        assert_eq!(back, points, "{format:?} roundtrip must preserve the sweep");
    }
}

#[test]
fn auto_grid_trains_fully_connected_points_deterministically() {
    let hw = HardwareModel::default();
    let (train_set, test_set) = blob_data(12, 240);
    let mut spec = GridSpec::new("fc");
    spec.precisions = vec![Precision::default_fixed(4).unwrap()];
    spec.scales = vec![0.03125];
    spec.epochs = Some(1);
    spec.batch_size = Some(20);

    let run = |seed: u64| {
        let mut s = spec.clone();
        s.seed = seed;
        run_grid(&s, &hw, Some((&train_set, &test_set))).unwrap()
    };

    let first = run(3);
    assert_eq!(first.len(), 1);
    let point = &first[0];
    assert!(point.is_trained());
    assert_eq!(point.epochs, 1);
    assert!(point.activation.is_some(), "winning activation is recorded");
    assert!(point.error.is_none());

    let again = run(3);
    assert_eq!(again, first, "same grid seed, same sweep");
}

#[test]
fn pareto_front_keeps_exactly_the_non_dominated_points() {
    let template = DesignPoint {
        precision: Precision::Binary,
        scale: 1.0,
        topology: "fc".into(),
        test_error: Some(0.10),
        memory_bits: 100,
        num_ops: 1,
        c_avg: 1.0,
        throughput_fps: 10.0,
        epochs: 1,
        seed: 0,
        activation: Some(Activation::HardTanh),
        error: None,
    };
    let mut points = Vec::new();
    // 0: best error, worst throughput. 1: worst error, best throughput.
    // 2: dominated by 0 on both axes. 3: duplicate of 0 (ties survive).
    for (err, fps) in [(0.05, 10.0), (0.20, 50.0), (0.08, 5.0), (0.05, 10.0)] {
        let mut p = template.clone();
        p.test_error = Some(err);
        p.throughput_fps = fps;
        points.push(p);
    }
    let objectives = [PointObjective::TestError, PointObjective::ThroughputFps];
    let front = pareto_front(&points, &objectives).unwrap();
    let members: Vec<usize> = (0..points.len()).filter(|&i| front.contains(i)).collect();
    assert_eq!(members, vec![0, 1, 3]);
}

#[test]
fn reference_families_resolve_by_name() {
    for (name, scale) in [("fc", 0.125), ("vgg", 1.0), ("alexnet", 1.0)] {
        let topo = reference_by_name(name, scale).unwrap();
        topo.validate().unwrap();
        assert!(topo.count_params() > 0);
    }
    assert_eq!(
        reference_by_name("fc", 0.125).unwrap(),
        reference_fc(0.125).unwrap()
    );
    assert!(matches!(
        reference_by_name("resnet", 1.0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn topology_file_roundtrip() {
    let topo = reference_by_name("fc", 0.0625).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.toml");
    topo.save(&path).unwrap();
    let back = TopologySpec::load(&path).unwrap();
    assert_eq!(back, topo);
}

#[test]
fn dataset_split_is_an_exact_partition() {
    let mut rng = Rng::new(77);
    let full = synthetic_blobs(&mut rng, 100, 4, 16, 4.0).unwrap();
    let (a, b) = split(&full, 0.7, &mut rng).unwrap();
    assert_eq!(a.len(), 70);
    assert_eq!(b.len(), 30);
    assert_eq!(a.features(), full.features());
    assert_eq!(b.num_classes(), full.num_classes());

    // Label counts across the two halves must add up to the originals.
    let count = |ds: &Dataset| {
        let mut c = vec![0usize; ds.num_classes()];
        for &l in ds.labels() {
            c[l] += 1;
        }
        c
    };
    let (ca, cb, cf) = (count(&a), count(&b), count(&full));
    let sum: Vec<usize> = ca.iter().zip(&cb).map(|(x, y)| x + y).collect();
    assert_eq!(sum, cf);

    assert!(matches!(
        split(&full, 1.0, &mut rng),
        Err(Error::InvalidArgument(_))
    ));
}
