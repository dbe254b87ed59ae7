//! Scratch probe: one-epoch wall time at acceptance-suite sizes.

use std::time::Instant;

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

    for (scale, n) in [(0.125f64, 60000usize), (0.03125, 6000)] {
        let train = train.take(n).unwrap();
        let topo = reference_fc(scale).unwrap();
        let mut cfg = TrainConfig::for_precision(Precision::default_fixed(4).unwrap());
        cfg.epochs = 1;
        let t0 = Instant::now();
        let (_, metrics) = fit_observed(&cfg, &topo, &train, &test, |_| {}).unwrap();
        println!(
            "scale {scale} n {n}: epoch {:.1}s, valid_err {:.4}",
            t0.elapsed().as_secs_f64(),
            metrics[0].valid_error
        );
    }
}
