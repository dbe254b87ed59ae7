//! The (precision × scale) sweep: train each point, attach hardware
//! estimates, and return a deterministically ordered point list.

use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::hwmodel::{CostMode, HardwareModel};
use crate::quantize::Precision;
use crate::rng::derive_seed;
use crate::topology::{reference_by_name, Activation, LayerSpec, TopologySpec};
use crate::trainer::{fit, TrainConfig};

/// Whether grid points are trained or only cost-estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainPolicy {
    /// Train fully connected topologies; conv families (whose full runs are
    /// not desk-scale) get hardware estimates only.
    #[default]
    Auto,
    /// Train every point, recording a failure marker where training is
    /// unsupported or fails.
    Always,
    /// Hardware estimates only.
    Never,
}

impl std::str::FromStr for TrainPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<TrainPolicy> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(TrainPolicy::Auto),
            "always" => Ok(TrainPolicy::Always),
            "never" => Ok(TrainPolicy::Never),
            other => Err(Error::arg(format!(
                "unknown train policy '{other}' (expected auto, always, or never)"
            ))),
        }
    }
}

impl std::fmt::Display for TrainPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrainPolicy::Auto => "auto",
            TrainPolicy::Always => "always",
            TrainPolicy::Never => "never",
        })
    }
}

/// What to sweep and how to train it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Reference family: "fc", "vgg", or "alexnet".
    pub topology: String,
    pub precisions: Vec<Precision>,
    pub scales: Vec<f64>,
    /// Base seed; per-point seeds are derived from it together with the
    /// point's precision and scale, so growing the grid never changes the
    /// seed of an existing point.
    pub seed: u64,
    /// Override the per-precision default epoch count.
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub train: TrainPolicy,
    /// Control-logic overhead added to the throughput denominator.
    pub delta: f64,
    pub cost_mode: CostMode,
}

impl GridSpec {
    pub fn new(topology: &str) -> GridSpec {
        GridSpec {
            topology: topology.to_string(),
            precisions: Vec::new(),
            scales: Vec::new(),
            seed: 0,
            epochs: None,
            batch_size: None,
            train: TrainPolicy::Auto,
            delta: 0.0,
            cost_mode: CostMode::Average,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.precisions.is_empty() {
            return Err(Error::arg("grid needs at least one precision"));
        }
        if self.scales.is_empty() {
            return Err(Error::arg("grid needs at least one scale"));
        }
        for &s in &self.scales {
            // Surfaces bad scales and a bad family name before the sweep.
            reference_by_name(&self.topology, s)?;
        }
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(Error::arg(format!("delta must be >= 0, got {}", self.delta)));
        }
        Ok(())
    }
}

/// One evaluated grid point: accuracy (when trained) joined with the
/// hardware estimate for its (topology, precision).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub precision: Precision,
    pub scale: f64,
    pub topology: String,
    /// Final-epoch test error; `None` for estimate-only or failed points.
    pub test_error: Option<f64>,
    pub memory_bits: u64,
    pub num_ops: u64,
    pub c_avg: f64,
    pub throughput_fps: f64,
    /// Epochs actually trained (0 when estimate-only).
    pub epochs: usize,
    /// The point's derived seed.
    pub seed: u64,
    /// Winning activation function, when trained.
    pub activation: Option<Activation>,
    /// Failure marker: why training produced no accuracy.
    pub error: Option<String>,
}

impl DesignPoint {
    pub fn is_trained(&self) -> bool {
        self.test_error.is_some()
    }
}

/// Seed for one grid point, a pure function of the grid seed and the
/// point's coordinates.
pub fn point_seed(grid_seed: u64, precision: Precision, scale: f64) -> u64 {
    derive_seed(grid_seed, &format!("point:{precision}:{scale}"))
}

fn precision_key(p: Precision) -> (u32, String) {
    (p.bit_width(), p.to_string())
}

fn is_fully_connected(topology: &TopologySpec) -> bool {
    topology
        .layers
        .iter()
        .all(|l| matches!(l, LayerSpec::FullyConnected { .. }))
}

/// Train a point with both activation functions and keep the lower-error
/// outcome. Ties keep the precision's default. Returns the failure marker
/// when every attempt fails.
fn train_point(
    spec: &GridSpec,
    topology: &TopologySpec,
    precision: Precision,
    seed: u64,
    train_set: &Dataset,
    test_set: &Dataset,
) -> (Option<(f64, Activation)>, usize, Option<String>) {
    let default_act = TrainConfig::for_precision(precision).activation_fn;
    let other_act = match default_act {
        Activation::Relu => Activation::HardTanh,
        _ => Activation::Relu,
    };
    let mut best: Option<(f64, Activation)> = None;
    let mut failures = Vec::new();
    let mut epochs_used = 0;
    for act in [default_act, other_act] {
        let mut config = TrainConfig::for_precision(precision)
            .with_seed(seed)
            .with_activation(act);
        if let Some(epochs) = spec.epochs {
            config.epochs = epochs;
        }
        if let Some(batch) = spec.batch_size {
            config.batch_size = batch;
        }
        match fit(&config, topology, train_set, test_set) {
            Ok((_, metrics)) => {
                let err = metrics.last().map_or(1.0, |m| m.valid_error);
                epochs_used = config.epochs;
                if best.map_or(true, |(b, _)| err < b) {
                    best = Some((err, act));
                }
            }
            Err(e) => failures.push(format!("{act}: {e}")),
        }
    }
    let marker = if best.is_none() {
        Some(failures.join("; "))
    } else {
        None
    };
    (best, epochs_used, marker)
}

/// Sweep the grid. Each (precision, scale) point gets a hardware estimate;
/// trainable points (per the policy and available data) are trained with
/// both activation functions, keeping the lower-error result. A training
/// failure marks the point and the sweep continues. Output is sorted by
/// (precision, scale) regardless of execution order.
pub fn run_grid(
    spec: &GridSpec,
    hw: &HardwareModel,
    data: Option<(&Dataset, &Dataset)>,
) -> Result<Vec<DesignPoint>> {
    spec.validate()?;
    hw.validate()?;

    let mut precisions = spec.precisions.clone();
    precisions.sort_by_key(|p| precision_key(*p));
    precisions.dedup();
    let mut scales = spec.scales.clone();
    scales.sort_by(f64::total_cmp);
    scales.dedup();

    let mut points = Vec::with_capacity(precisions.len() * scales.len());
    for &precision in &precisions {
        for &scale in &scales {
            let topology = reference_by_name(&spec.topology, scale)?;
            let seed = point_seed(spec.seed, precision, scale);
            let est = hw.estimate(&topology, precision, spec.delta, spec.cost_mode)?;

            let wants_training = match spec.train {
                TrainPolicy::Always => true,
                TrainPolicy::Never => false,
                TrainPolicy::Auto => is_fully_connected(&topology),
            };
            let (outcome, epochs, marker) = match (wants_training, data) {
                (true, Some((train_set, test_set))) => {
                    log::info!(
                        "grid point {} x {} (seed {seed}): training",
                        precision,
                        scale
                    );
                    train_point(spec, &topology, precision, seed, train_set, test_set)
                }
                (true, None) => (
                    None,
                    0,
                    Some("no dataset supplied for a trainable point".to_string()),
                ),
                (false, _) => (None, 0, None),
            };

            points.push(DesignPoint {
                precision,
                scale,
                topology: topology.name.clone(),
                test_error: outcome.map(|(err, _)| err),
                memory_bits: est.memory_bits,
                num_ops: est.num_ops,
                c_avg: est.c_avg,
                throughput_fps: est.throughput_fps,
                epochs,
                seed,
                activation: outcome.map(|(_, act)| act),
                error: marker,
            });
        }
    }
    // Construction order already follows the sorted axes; make the
    // contract explicit so concurrent execution cannot change it.
    points.sort_by(|a, b| {
        precision_key(a.precision)
            .cmp(&precision_key(b.precision))
            .then(a.scale.total_cmp(&b.scale))
    });
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::pareto::{pareto_front, PointObjective};
    use crate::rng::Rng;

    fn blobs(seed: u64, n: usize) -> Dataset {
        let mut rng = Rng::new(seed);
        crate::dataio::synthetic_blobs(&mut rng, n, 10, 784, 6.0).unwrap()
    }

    fn fast_spec() -> GridSpec {
        let mut spec = GridSpec::new("fc");
        spec.precisions = vec!["fp32".parse().unwrap(), "binary".parse().unwrap()];
        spec.scales = vec![0.0625, 0.03125];
        spec.epochs = Some(1);
        spec.batch_size = Some(20);
        spec
    }

    #[test]
    fn cartesian_cardinality_and_sorted_order() {
        let spec = fast_spec();
        let points = run_grid(&spec, &HardwareModel::default(), None).unwrap();
        assert_eq!(points.len(), 4);
        let coords: Vec<(String, f64)> = points
            .iter()
            .map(|p| (p.precision.to_string(), p.scale))
            .collect();
        // Sorted by (precision, scale) even though the spec listed the
        // axes in a different order.
        assert_eq!(
            coords,
            vec![
                ("binary".to_string(), 0.03125),
                ("binary".to_string(), 0.0625),
                ("fp32".to_string(), 0.03125),
                ("fp32".to_string(), 0.0625),
            ]
        );
        // No dataset: trainable points carry failure markers.
        assert!(points.iter().all(|p| p.test_error.is_none()));
        assert!(points.iter().all(|p| p.error.is_some()));
    }

    #[test]
    fn trained_grid_is_deterministic_and_consistent_with_hwmodel() {
        let train = blobs(1, 160);
        let test = blobs(2, 80);
        let hw = HardwareModel::default();
        let spec = fast_spec();

        let points = run_grid(&spec, &hw, Some((&train, &test))).unwrap();
        assert_eq!(points.len(), 4);
        for p in &points {
            let err = p.test_error.expect("fc points train");
            assert!((0.0..=1.0).contains(&err));
            assert!(p.activation.is_some());
            assert_eq!(p.epochs, 1);
            assert!(p.error.is_none());

            let topo = reference_by_name("fc", p.scale).unwrap();
            let est = hw
                .estimate(&topo, p.precision, spec.delta, spec.cost_mode)
                .unwrap();
            assert_eq!(p.memory_bits, est.memory_bits);
            assert_eq!(p.num_ops, est.num_ops);
            assert_eq!(p.c_avg, est.c_avg);
            assert_eq!(p.throughput_fps, est.throughput_fps);
        }

        let rerun = run_grid(&spec, &hw, Some((&train, &test))).unwrap();
        assert_eq!(points, rerun);
    }

    #[test]
    fn growing_the_grid_leaves_existing_points_untouched() {
        let train = blobs(1, 120);
        let test = blobs(2, 60);
        let hw = HardwareModel::default();

        let mut small = fast_spec();
        small.precisions = vec!["fp32".parse().unwrap()];
        small.scales = vec![0.03125];
        let mut grown = small.clone();
        grown.precisions.push("int4".parse().unwrap());
        grown.scales.push(0.0625);

        let a = run_grid(&small, &hw, Some((&train, &test))).unwrap();
        let b = run_grid(&grown, &hw, Some((&train, &test))).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(b.len(), 4);
        let shared = b
            .iter()
            .find(|p| p.precision == a[0].precision && p.scale == a[0].scale)
            .unwrap();
        assert_eq!(shared, &a[0]);
    }

    #[test]
    fn conv_families_are_estimate_only_under_auto() {
        let train = blobs(1, 60);
        let test = blobs(2, 30);
        let mut spec = GridSpec::new("vgg");
        spec.precisions = vec!["binary".parse().unwrap()];
        spec.scales = vec![0.03125];
        let points = run_grid(&spec, &HardwareModel::default(), Some((&train, &test))).unwrap();
        assert_eq!(points.len(), 1);
        let p = &points[0];
        assert!(p.test_error.is_none());
        assert!(p.activation.is_none());
        assert_eq!(p.epochs, 0);
        assert!(p.error.is_none(), "estimate-only is not a failure");
        assert!(p.memory_bits > 0);
    }

    #[test]
    fn training_failures_mark_points_without_aborting() {
        let train = blobs(1, 60);
        let test = blobs(2, 30);
        let mut spec = GridSpec::new("vgg");
        spec.precisions = vec!["binary".parse().unwrap(), "fp32".parse().unwrap()];
        spec.scales = vec![0.03125];
        spec.train = TrainPolicy::Always;
        spec.epochs = Some(1);
        let points = run_grid(&spec, &HardwareModel::default(), Some((&train, &test))).unwrap();
        assert_eq!(points.len(), 2, "sweep completes despite failures");
        for p in &points {
            assert!(p.test_error.is_none());
            let marker = p.error.as_deref().expect("failure recorded");
            assert!(!marker.is_empty());
        }
    }

    #[test]
    fn missing_objectives_keep_points_off_the_frontier() {
        let spec = {
            let mut s = fast_spec();
            s.train = TrainPolicy::Never;
            s
        };
        let mut points = run_grid(&spec, &HardwareModel::default(), None).unwrap();
        // Hardware-only objectives: every point participates.
        let hw_front =
            pareto_front(&points, &[PointObjective::MemoryBits, PointObjective::ThroughputFps])
                .unwrap();
        assert!(!hw_front.is_empty());

        // Accuracy objective: only the point that has an error can be on it.
        points[0].test_error = Some(0.1);
        let acc_front =
            pareto_front(&points, &[PointObjective::TestError, PointObjective::ThroughputFps])
                .unwrap();
        assert_eq!(acc_front.members, vec![0]);
    }

    #[test]
    fn bad_grids_are_rejected() {
        let mut spec = fast_spec();
        spec.scales.clear();
        assert!(run_grid(&spec, &HardwareModel::default(), None).is_err());

        let mut spec = fast_spec();
        spec.topology = "resnet".into();
        assert!(run_grid(&spec, &HardwareModel::default(), None).is_err());

        let mut spec = fast_spec();
        spec.scales = vec![-1.0];
        assert!(run_grid(&spec, &HardwareModel::default(), None).is_err());
    }
}
