//! Scratch probe: does a coarse-precision net move at all from Glorot init?

use qdse_core::dataio::load_idx;
use qdse_core::quantize::Precision;
use qdse_core::topology::reference_fc;
use qdse_core::trainer::{fit_observed, TrainConfig};

fn main() {
    let train = load_idx(
        "data/mnist/train-images-idx3-ubyte",
        "data/mnist/train-labels-idx1-ubyte",
    )
    .unwrap();
    let test = load_idx(
        "data/mnist/t10k-images-idx3-ubyte",
        "data/mnist/t10k-labels-idx1-ubyte",
    )
    .unwrap();
    let train = train.take(2000).unwrap();
    let test = test.take(1000).unwrap();

    for (name, scale) in [("int4", 0.125f64), ("int2", 0.03125)] {
        let precision: Precision = name.parse().unwrap();
        let topo = reference_fc(scale).unwrap();
        let mut cfg = TrainConfig::for_precision(precision);
        cfg.epochs = 2;
        let (model, metrics) = fit_observed(&cfg, &topo, &train, &test, |_| {}).unwrap();
        println!("--- {name} @ scale {scale} ---");
        for m in &metrics {
            println!(
                "epoch {} loss {:.6} valid_err {:.4}",
                m.epoch, m.train_loss, m.valid_error
            );
        }
        for (i, wq) in model.quantized_weights().iter().enumerate() {
            let nonzero = wq.data().iter().filter(|v| **v != 0.0).count();
            println!(
                "layer {i}: {}/{} quantized weights nonzero, max|master| {:.4}",
                nonzero,
                wq.len(),
                model.max_abs_weight()
            );
        }
    }
}
