//! Scratch probe: activation/bn-order matrix for the low-bit precisions.

use std::fmt::Write as _;
use std::time::Instant;

use qdse_core::dataio::load_idx;
use qdse_core::topology::{reference_fc, Activation};
use qdse_core::trainer::{fit, BnOrder, TrainConfig};

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
    let small_train = train.take(6000).unwrap();

    let mut report = String::new();
    let mut run = |tag: &str,
                   precision: &str,
                   scale: f64,
                   act: Activation,
                   order: BnOrder,
                   epochs: usize,
                   small: bool,
                   report: &mut String| {
        let topo = reference_fc(scale).unwrap();
        let mut cfg = TrainConfig::for_precision(precision.parse().unwrap());
        cfg.activation_fn = act;
        cfg.bn_order = order;
        cfg.epochs = epochs;
        let data = if small { &small_train } else { &train };
        let t0 = Instant::now();
        let (_, metrics) = fit(&cfg, &topo, data, &test).unwrap();
        let last = metrics.last().unwrap();
        let tail: Vec<String> = metrics
            .iter()
            .rev()
            .take(6)
            .rev()
            .map(|m| format!("{:.3}", m.valid_error))
            .collect();
        let line = format!(
            "{tag} {precision} {act} {order} e{epochs}: test_err {:.4} in {:.0}s (tail: {})",
            last.valid_error,
            t0.elapsed().as_secs_f64(),
            tail.join(" ")
        );
        println!("{line}");
        writeln!(report, "{line}").unwrap();
        std::fs::write("target/probe_int2.txt", &report).unwrap();
    };

    // Fast variants first (cheap, informs the big runs).
    run("fast", "binary", 0.03125, Activation::HardTanh, BnOrder::BnThenAct, 100, true, &mut report);
    run("fast", "int2", 0.03125, Activation::HardTanh, BnOrder::BnThenAct, 100, true, &mut report);
    run("fast", "int2", 0.03125, Activation::HardTanh, BnOrder::ActThenBn, 100, true, &mut report);
    run("fast", "int2", 0.03125, Activation::Relu, BnOrder::ActThenBn, 100, true, &mut report);

    // Main int2 matrix at 0.125 on the full training set.
    run("main", "int2", 0.125, Activation::HardTanh, BnOrder::BnThenAct, 10, false, &mut report);
    run("main", "int2", 0.125, Activation::HardTanh, BnOrder::ActThenBn, 10, false, &mut report);
    run("main", "int2", 0.125, Activation::Relu, BnOrder::BnThenAct, 10, false, &mut report);
}
