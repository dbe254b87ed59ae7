//! Scratch probe: run one training configuration given by CLI args.
//! Usage: probe_matrix <precision> <scale> <act> <order> <epochs> <small:0|1> [seed]

use std::time::Instant;

use qdse_core::dataio::load_idx;
use qdse_core::topology::Activation;
use qdse_core::trainer::{fit, BnOrder, TrainConfig};
use qdse_core::topology::reference_fc;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let precision = &args[0];
    let scale: f64 = args[1].parse().unwrap();
    let act: Activation = args[2].parse().unwrap();
    let order: BnOrder = args[3].parse().unwrap();
    let epochs: usize = args[4].parse().unwrap();
    let small = args[5] == "1";
    let seed: u64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(0);

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
    let data = if small { train.take(6000).unwrap() } else { train };

    let topo = reference_fc(scale).unwrap();
    let mut cfg = TrainConfig::for_precision(precision.parse().unwrap()).with_seed(seed);
    cfg.activation_fn = act;
    cfg.bn_order = order;
    cfg.epochs = epochs;
    if let Ok(eps) = std::env::var("QDSE_ADAM_EPS") {
        cfg.adam_epsilon = eps.parse().unwrap();
    }
    let t0 = Instant::now();
    let (_, metrics) = fit(&cfg, &topo, &data, &test).unwrap();
    let last = metrics.last().unwrap();
    let tail: Vec<String> = metrics
        .iter()
        .rev()
        .take(6)
        .rev()
        .map(|m| format!("{:.3}", m.valid_error))
        .collect();
    let floor = std::env::var("QDSE_INIT_FLOOR").unwrap_or_else(|_| "1.0".into());
    let eps = std::env::var("QDSE_ADAM_EPS").unwrap_or_else(|_| "1e-8".into());
    println!(
        "{precision} s{scale} {act} {order} e{epochs} small={small} seed={seed} floor={floor} eps={eps}: test_err {:.4} in {:.0}s (tail: {})",
        last.valid_error,
        t0.elapsed().as_secs_f64(),
        tail.join(" ")
    );
}
