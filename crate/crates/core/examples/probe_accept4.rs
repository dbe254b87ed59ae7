//! Scratch probe: full criterion-4-style training runs, results to a file.

use std::fmt::Write as _;
use std::time::Instant;

use qdse_core::dataio::load_idx;
use qdse_core::quantize::standard_precisions;
use qdse_core::topology::reference_fc;
use qdse_core::trainer::{fit, TrainConfig};

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

    let mut report = String::new();

    for precision in standard_precisions() {
        if precision.to_string() == "int16" {
            continue;
        }
        let topo = reference_fc(0.125).unwrap();
        let cfg = TrainConfig::for_precision(precision);
        let t0 = Instant::now();
        let (_, metrics) = fit(&cfg, &topo, &train, &test).unwrap();
        let last = metrics.last().unwrap();
        let line = format!(
            "main {precision}: test_err {:.4} in {:.0}s (epoch errs: {})",
            last.valid_error,
            t0.elapsed().as_secs_f64(),
            metrics
                .iter()
                .map(|m| format!("{:.3}", m.valid_error))
                .collect::<Vec<_>>()
                .join(" ")
        );
        println!("{line}");
        writeln!(report, "{line}").unwrap();
        std::fs::write("target/probe_accept4.txt", &report).unwrap();
    }

    let small_train = train.take(6000).unwrap();
    for precision in standard_precisions() {
        let topo = reference_fc(0.03125).unwrap();
        let cfg = TrainConfig::for_precision(precision);
        let t0 = Instant::now();
        let (_, metrics) = fit(&cfg, &topo, &small_train, &test).unwrap();
        let last = metrics.last().unwrap();
        let line = format!(
            "fast {precision}: test_err {:.4} in {:.0}s",
            last.valid_error,
            t0.elapsed().as_secs_f64()
        );
        println!("{line}");
        writeln!(report, "{line}").unwrap();
        std::fs::write("target/probe_accept4.txt", &report).unwrap();
    }
}
