//! Model state, Glorot initialization, and the quantized forward/backward
//! passes.
//!
//! Training keeps high-precision master weights; every propagation
//! quantizes them (and the hidden activations) to the configured lattices.
//! The output layer produces raw logits: no batch norm, no activation, no
//! activation quantization.

use crate::error::{Error, Result};
use crate::quantize::Precision;
use crate::nn::{
    act_backward, act_forward, argmax_rows, batchnorm_backward, batchnorm_forward_infer,
    batchnorm_forward_train, fc_backward, fc_forward, BnCache, BnParams, BN_EPSILON, BN_MOMENTUM,
};
use crate::rng::Rng;
use crate::tensor::Tensor;
use crate::topology::{Activation, LayerSpec, TopologySpec};
use crate::trainer::config::{BnOrder, TrainConfig};
use crate::dataio::Dataset;

/// Rows evaluated per inference chunk.
const EVAL_CHUNK: usize = 256;

/// First and second Adam moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Moments {
    pub m: Tensor,
    pub v: Tensor,
}

impl Moments {
    fn zeros(shape: &[usize]) -> Moments {
        Moments {
            m: Tensor::zeros(shape.to_vec()),
            v: Tensor::zeros(shape.to_vec()),
        }
    }
}

/// Per-layer trainable state: master weights, optional batch norm, the
/// resolved activation, and Adam moments for every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    /// High-precision master weights, `[in × out]`.
    pub weights: Tensor,
    pub bn: Option<BnParams>,
    pub activation: Activation,
    pub(crate) w_moments: Moments,
    pub(crate) gamma_moments: Option<Moments>,
    pub(crate) beta_moments: Option<Moments>,
}

/// A trainable model: configuration, topology, layer states, and the Adam
/// step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub config: TrainConfig,
    pub topology: TopologySpec,
    pub layers: Vec<LayerState>,
    pub step: u64,
}

/// Forward intermediates one layer needs for its backward pass.
#[derive(Debug)]
pub struct LayerTrace {
    /// Quantized input activations (the previous layer's output).
    a_prev_q: Tensor,
    /// Quantized weights used by this pass.
    w_q: Tensor,
    /// Pre-block linear output `s`.
    s: Tensor,
    /// Normalized `ŝ` (present only under `BnThenAct`, where the
    /// activation consumed it).
    s_hat: Option<Tensor>,
    bn_cache: Option<BnCache>,
    /// Block output entering the activation quantizer (hidden layers only).
    a: Option<Tensor>,
}

/// Parameter gradients for one layer.
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub g_w: Tensor,
    pub g_gamma: Option<Tensor>,
    pub g_beta: Option<Tensor>,
}

/// Glorot-uniform initialization: weights uniform in
/// ±sqrt(6 / (fan_in + fan_out)), batch norm at identity, moments zeroed.
/// Only fully-connected topologies are trainable; the activation configured
/// in `config` replaces every non-`None` topology activation.
pub fn glorot_init(
    config: &TrainConfig,
    topology: &TopologySpec,
    rng: &mut Rng,
) -> Result<ModelState> {
    config.validate()?;
    topology.validate()?;
    let mut layers = Vec::with_capacity(topology.layers.len());
    for spec in &topology.layers {
        let (&in_features, &out_features, &has_bn, &activation) = match spec {
            LayerSpec::FullyConnected {
                in_features,
                out_features,
                has_batchnorm,
                activation,
            } => (in_features, out_features, has_batchnorm, activation),
            other => {
                return Err(Error::arg(format!(
                    "training supports fully-connected topologies only, found {other:?}"
                )));
            }
        };
        let mut bound = (6.0 / (in_features + out_features) as f64).sqrt();
        // A bound below the weight lattice step would round every weight to
        // zero: the network outputs zero, every gradient is zero, and no
        // update can ever escape. Widen the bound to the step so about half
        // the initial weights land on nonzero lattice points.
        if let Precision::Fixed(fmt) = config.weight_precision {
            // TEMP experiment hook, remove before release.
            let factor: f64 = std::env::var("QDSE_INIT_FLOOR")
                .ok()
                .and_then(|s| s.parse().ok())
                .unwrap_or(1.0);
            bound = bound.max(fmt.step() * factor);
        }
        let weights = rng.uniform(-bound, bound, [in_features, out_features])?;
        let bn = has_bn.then(|| BnParams::new(out_features));
        let bn_moments = has_bn.then(|| Moments::zeros(&[out_features]));
        layers.push(LayerState {
            weights,
            bn,
            activation: if activation == Activation::None {
                Activation::None
            } else {
                config.activation_fn
            },
            w_moments: Moments::zeros(&[in_features, out_features]),
            gamma_moments: bn_moments.clone(),
            beta_moments: bn_moments,
        });
    }
    Ok(ModelState {
        config: config.clone(),
        topology: topology.clone(),
        layers,
        step: 0,
    })
}

impl ModelState {
    /// Quantized view of every layer's master weights.
    pub fn quantized_weights(&self) -> Vec<Tensor> {
        self.layers
            .iter()
            .map(|l| self.config.weight_precision.quantize_tensor(&l.weights))
            .collect()
    }

    /// Largest |master weight| across all layers.
    pub fn max_abs_weight(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.data())
            .fold(0.0, |acc, &w| acc.max(w.abs()))
    }
}

/// Training-mode forward pass: quantize weights, matmul, batch-norm and
/// activation in the configured order, quantize hidden activations. Batch
/// statistics update the running stats in `model`. Returns the per-layer
/// traces and the raw logits.
pub fn forward_train(model: &mut ModelState, batch: &Tensor) -> Result<(Vec<LayerTrace>, Tensor)> {
    let n_layers = model.layers.len();
    let weight_p = model.config.weight_precision;
    let act_p = model.config.activation_precision;
    let bn_order = model.config.bn_order;

    let mut traces = Vec::with_capacity(n_layers);
    let mut a_q = batch.clone();
    for (i, layer) in model.layers.iter_mut().enumerate() {
        let last = i + 1 == n_layers;
        let w_q = weight_p.quantize_tensor(&layer.weights);
        let s = fc_forward(&a_q, &w_q)?;
        if last {
            let logits = s.clone();
            traces.push(LayerTrace {
                a_prev_q: std::mem::replace(&mut a_q, logits),
                w_q,
                s,
                s_hat: None,
                bn_cache: None,
                a: None,
            });
        } else {
            let (a, s_hat, bn_cache) = match (&mut layer.bn, bn_order) {
                (Some(bn), BnOrder::BnThenAct) => {
                    let (s_hat, cache) = batchnorm_forward_train(&s, bn, BN_EPSILON, BN_MOMENTUM)?;
                    let a = act_forward(layer.activation, &s_hat);
                    (a, Some(s_hat), Some(cache))
                }
                (Some(bn), BnOrder::ActThenBn) => {
                    let t = act_forward(layer.activation, &s);
                    let (a, cache) = batchnorm_forward_train(&t, bn, BN_EPSILON, BN_MOMENTUM)?;
                    (a, None, Some(cache))
                }
                (None, _) => (act_forward(layer.activation, &s), None, None),
            };
            let a_next = act_p.quantize_tensor(&a);
            traces.push(LayerTrace {
                a_prev_q: std::mem::replace(&mut a_q, a_next),
                w_q,
                s,
                s_hat,
                bn_cache,
                a: Some(a),
            });
        }
    }
    Ok((traces, a_q))
}

/// Inference logits with the given pre-quantized weights and running batch
/// norm statistics.
fn infer_logits(model: &ModelState, w_q: &[Tensor], batch: &Tensor) -> Result<Tensor> {
    let n_layers = model.layers.len();
    let act_p = model.config.activation_precision;
    let bn_order = model.config.bn_order;
    let mut a_q = batch.clone();
    for (i, layer) in model.layers.iter().enumerate() {
        let s = fc_forward(&a_q, &w_q[i])?;
        if i + 1 == n_layers {
            return Ok(s);
        }
        let a = match (&layer.bn, bn_order) {
            (Some(bn), BnOrder::BnThenAct) => {
                let s_hat = batchnorm_forward_infer(&s, bn, BN_EPSILON)?;
                act_forward(layer.activation, &s_hat)
            }
            (Some(bn), BnOrder::ActThenBn) => {
                let t = act_forward(layer.activation, &s);
                batchnorm_forward_infer(&t, bn, BN_EPSILON)?
            }
            (None, _) => act_forward(layer.activation, &s),
        };
        a_q = act_p.quantize_tensor(&a);
    }
    // A validated topology always has >= 1 layer, so the loop returned.
    Err(Error::shape("model has no layers"))
}

/// Inference-mode forward pass (running batch-norm statistics, quantized
/// weights and activations). Returns raw logits.
pub fn forward_infer(model: &ModelState, batch: &Tensor) -> Result<Tensor> {
    infer_logits(model, &model.quantized_weights(), batch)
}

/// Reverse pass from the loss gradient at the logits. Mirrors
/// [`forward_train`]: straight-through estimator through the activation
/// quantizer, then activation/batch-norm backward in reverse block order,
/// then the FC backward against the quantized weights.
pub fn backward_pass(
    model: &ModelState,
    traces: &[LayerTrace],
    g_logits: &Tensor,
) -> Result<Vec<LayerGrads>> {
    if traces.len() != model.layers.len() {
        return Err(Error::shape(format!(
            "{} traces for {} layers",
            traces.len(),
            model.layers.len()
        )));
    }
    let act_p = model.config.activation_precision;
    let bn_order = model.config.bn_order;
    let mut grads: Vec<Option<LayerGrads>> = (0..traces.len()).map(|_| None).collect();
    let mut g = g_logits.clone();
    for (i, (layer, trace)) in model.layers.iter().zip(traces).enumerate().rev() {
        let mut g_gamma = None;
        let mut g_beta = None;
        if let Some(a) = &trace.a {
            g = act_p.ste_backward(&g, a)?;
            match (&layer.bn, trace.bn_cache.as_ref(), bn_order) {
                (Some(bn), Some(cache), BnOrder::BnThenAct) => {
                    let s_hat = trace.s_hat.as_ref().ok_or_else(|| {
                        Error::Compute("bn_then_act trace missing normalized activations".into())
                    })?;
                    g = act_backward(layer.activation, &g, s_hat)?;
                    let (g_s, gg, gb) = batchnorm_backward(&g, cache, bn)?;
                    g = g_s;
                    g_gamma = Some(gg);
                    g_beta = Some(gb);
                }
                (Some(bn), Some(cache), BnOrder::ActThenBn) => {
                    let (g_t, gg, gb) = batchnorm_backward(&g, cache, bn)?;
                    g = act_backward(layer.activation, &g_t, &trace.s)?;
                    g_gamma = Some(gg);
                    g_beta = Some(gb);
                }
                (None, None, _) => {
                    g = act_backward(layer.activation, &g, &trace.s)?;
                }
                _ => {
                    return Err(Error::Compute(
                        "batch-norm state and forward trace disagree".into(),
                    ));
                }
            }
        }
        let (g_prev, g_w) = fc_backward(&g, &trace.a_prev_q, &trace.w_q)?;
        grads[i] = Some(LayerGrads { g_w, g_gamma, g_beta });
        g = g_prev;
    }
    Ok(grads.into_iter().map(|g| g.expect("filled in reverse walk")).collect())
}

/// Classification error fraction of the quantized inference path on a
/// dataset. Deterministic: no RNG is involved.
pub fn evaluate(model: &ModelState, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::arg("cannot evaluate on an empty dataset"));
    }
    let w_q = model.quantized_weights();
    let mut wrong = 0usize;
    let indices: Vec<usize> = (0..ds.len()).collect();
    for chunk in indices.chunks(EVAL_CHUNK) {
        let (x, y) = ds.gather(chunk)?;
        let logits = infer_logits(model, &w_q, &x)?;
        let pred = argmax_rows(&logits)?;
        wrong += pred.iter().zip(&y).filter(|(p, t)| p != t).count();
    }
    Ok(wrong as f64 / ds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{assert_close, central_diff};
    use crate::nn::softmax_xent;
    use crate::quantize::Precision;
    use crate::topology::reference_fc;

    fn tiny_topology() -> TopologySpec {
        TopologySpec {
            name: "tiny".into(),
            input_shape: vec![6],
            num_classes: 3,
            layers: vec![
                LayerSpec::fc(6, 8, Activation::HardTanh),
                LayerSpec::fc(8, 8, Activation::HardTanh),
                LayerSpec::fc_output(8, 3),
            ],
        }
    }

    fn random_batch(rng: &mut Rng, n: usize, features: usize) -> Tensor {
        // Inputs on the 8-bit lattice, like real data.
        rng.uniform(0.0, 1.0, [n, features])
            .unwrap()
            .map(|v| (v * 255.0).round() / 255.0)
    }

    #[test]
    fn glorot_bounds_variance_and_determinism() {
        let cfg = TrainConfig::for_precision(Precision::Float32);
        let topo = reference_fc(0.125).unwrap();
        let mut rng = Rng::new(1);
        let model = glorot_init(&cfg, &topo, &mut rng).unwrap();

        let bound = (6.0f64 / (784.0 + 512.0)).sqrt();
        assert!((bound - 0.06804).abs() < 1e-5);
        let w = &model.layers[0].weights;
        assert!(w.data().iter().all(|&x| x.abs() <= bound));

        let mean: f64 = w.data().iter().sum::<f64>() / w.len() as f64;
        let var: f64 = w.data().iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / w.len() as f64;
        let expected = 2.0 / (784.0 + 512.0);
        assert!(
            (var - expected).abs() / expected < 0.1,
            "sample variance {var} vs expected {expected}"
        );

        let mut rng2 = Rng::new(1);
        let model2 = glorot_init(&cfg, &topo, &mut rng2).unwrap();
        assert_eq!(model2.layers[0].weights, model.layers[0].weights);

        for layer in &model.layers {
            if let Some(bn) = &layer.bn {
                assert!(bn.gamma.data().iter().all(|&g| g == 1.0));
                assert!(bn.beta.data().iter().all(|&b| b == 0.0));
            }
            assert!(layer.w_moments.m.data().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn coarse_lattices_widen_the_init_bound_to_stay_trainable() {
        // 784->512 Glorot bound (~0.068) sits entirely inside the int4 dead
        // zone (step 0.25): without widening, every quantized weight would
        // be zero and the model could never receive a gradient.
        let topo = reference_fc(0.125).unwrap();
        for bits in [2u32, 4] {
            let precision = Precision::default_fixed(bits).unwrap();
            let cfg = TrainConfig::for_precision(precision);
            let mut rng = Rng::new(7);
            let model = glorot_init(&cfg, &topo, &mut rng).unwrap();
            let step = match precision {
                Precision::Fixed(fmt) => fmt.step(),
                _ => unreachable!(),
            };
            let w = &model.layers[0].weights;
            assert!(w.data().iter().all(|&x| x.abs() <= step));
            assert!(w.data().iter().any(|&x| x.abs() > step / 2.0));
            for wq in model.quantized_weights() {
                let nonzero = wq.data().iter().filter(|v| **v != 0.0).count();
                // Uniform in +-step puts about half the mass past step/2.
                assert!(
                    nonzero * 3 > wq.len(),
                    "expected at least a third of quantized weights nonzero, got {nonzero}/{}",
                    wq.len()
                );
            }
        }

        // Finer lattices keep the plain Glorot bound.
        let cfg = TrainConfig::for_precision(Precision::default_fixed(8).unwrap());
        let mut rng = Rng::new(7);
        let model = glorot_init(&cfg, &topo, &mut rng).unwrap();
        let bound = (6.0f64 / 1296.0).sqrt();
        assert!(model.layers[0]
            .weights
            .data()
            .iter()
            .all(|&x| x.abs() <= bound));
    }

    #[test]
    fn conv_topologies_are_rejected() {
        let cfg = TrainConfig::for_precision(Precision::Float32);
        let topo = crate::topology::reference_vgg(0.03125).unwrap();
        let mut rng = Rng::new(1);
        let err = glorot_init(&cfg, &topo, &mut rng).unwrap_err();
        assert!(err.to_string().contains("fully-connected"));
    }

    #[test]
    fn float32_forward_equals_unquantized_reference() {
        let cfg = TrainConfig::for_precision(Precision::Float32);
        let mut rng = Rng::new(2);
        let mut model = glorot_init(&cfg, &tiny_topology(), &mut rng).unwrap();
        let reference = model.clone();
        let x = random_batch(&mut rng, 4, 6);
        let (_, logits) = forward_train(&mut model, &x).unwrap();

        // Hand-composed reference on the raw master weights with no
        // quantization anywhere (ActThenBn is the FP32 default order).
        let mut ref_layers = reference.layers.clone();
        let mut a = x.clone();
        let n = ref_layers.len();
        for (i, layer) in ref_layers.iter_mut().enumerate() {
            let s = a.matmul(&layer.weights).unwrap();
            if i + 1 == n {
                a = s;
            } else {
                let t = act_forward(layer.activation, &s);
                let bn = layer.bn.as_mut().unwrap();
                let (y, _) = batchnorm_forward_train(&t, bn, BN_EPSILON, BN_MOMENTUM).unwrap();
                a = y;
            }
        }
        assert_eq!(logits, a, "identity quantizers change nothing");
    }

    #[test]
    fn binary_hidden_activations_are_signs() {
        let cfg = TrainConfig::for_precision(Precision::Binary);
        let mut rng = Rng::new(3);
        let mut model = glorot_init(&cfg, &tiny_topology(), &mut rng).unwrap();
        let x = random_batch(&mut rng, 5, 6);
        let (traces, _) = forward_train(&mut model, &x).unwrap();
        // traces[i].a_prev_q for i >= 1 is layer i-1's quantized output.
        for trace in &traces[1..] {
            assert!(trace.a_prev_q.data().iter().all(|&v| v == 1.0 || v == -1.0));
        }
        // Quantized weights on the binary lattice as well.
        for wq in model.quantized_weights() {
            assert!(wq.data().iter().all(|&v| v == 1.0 || v == -1.0));
        }
    }

    #[test]
    fn single_layer_net_logits_are_input_times_quantized_weights() {
        let topo = TopologySpec {
            name: "single".into(),
            input_shape: vec![4],
            num_classes: 2,
            layers: vec![LayerSpec::fc_output(4, 2)],
        };
        let cfg = TrainConfig::for_precision(Precision::Binary);
        let mut rng = Rng::new(4);
        let mut model = glorot_init(&cfg, &topo, &mut rng).unwrap();
        let x = random_batch(&mut rng, 3, 4);
        let (_, logits) = forward_train(&mut model, &x).unwrap();
        let expected = x
            .matmul(&Precision::Binary.quantize_tensor(&model.layers[0].weights))
            .unwrap();
        assert_eq!(logits, expected);
    }

    #[test]
    fn zero_loss_gradient_means_zero_parameter_gradients() {
        let cfg = TrainConfig::for_precision(Precision::default_fixed(8).unwrap());
        let mut rng = Rng::new(5);
        let mut model = glorot_init(&cfg, &tiny_topology(), &mut rng).unwrap();
        let x = random_batch(&mut rng, 4, 6);
        let (traces, logits) = forward_train(&mut model, &x).unwrap();
        let zero = Tensor::zeros(logits.shape().to_vec());
        let grads = backward_pass(&model, &traces, &zero).unwrap();
        for g in &grads {
            assert!(g.g_w.data().iter().all(|&v| v == 0.0));
            if let Some(gg) = &g.g_gamma {
                assert!(gg.data().iter().all(|&v| v == 0.0));
            }
        }
    }

    /// End-to-end FP32 gradient check through BN + activation + softmax.
    fn gradcheck_end_to_end(bn_order: BnOrder, act: Activation) {
        let mut cfg = TrainConfig::for_precision(Precision::Float32);
        cfg.bn_order = bn_order;
        cfg.activation_fn = act;
        let mut rng = Rng::new(6);
        let topo = TopologySpec {
            name: "gc".into(),
            input_shape: vec![5],
            num_classes: 3,
            layers: vec![
                LayerSpec::fc(5, 7, Activation::HardTanh),
                LayerSpec::fc_output(7, 3),
            ],
        };
        let model = glorot_init(&cfg, &topo, &mut rng).unwrap();
        let x = rng.uniform(-1.0, 1.0, [6, 5]).unwrap();
        let labels = vec![0, 1, 2, 0, 1, 2];

        let loss_for = |weights: &[Tensor], gamma: &Tensor, beta: &Tensor| -> f64 {
            let mut m = model.clone();
            for (layer, w) in m.layers.iter_mut().zip(weights) {
                layer.weights = w.clone();
            }
            if let Some(bn) = &mut m.layers[0].bn {
                bn.gamma = gamma.clone();
                bn.beta = beta.clone();
            }
            let (_, logits) = forward_train(&mut m, &x).unwrap();
            softmax_xent(&logits, &labels).unwrap().0
        };

        let mut m = model.clone();
        let (traces, logits) = forward_train(&mut m, &x).unwrap();
        let (_, g_logits) = softmax_xent(&logits, &labels).unwrap();
        let grads = backward_pass(&m, &traces, &g_logits).unwrap();

        let w0 = model.layers[0].weights.clone();
        let w1 = model.layers[1].weights.clone();
        let bn = model.layers[0].bn.clone().unwrap();

        let fd_w0 = central_diff(&w0, |t| {
            loss_for(&[t.clone(), w1.clone()], &bn.gamma, &bn.beta)
        });
        let fd_w1 = central_diff(&w1, |t| {
            loss_for(&[w0.clone(), t.clone()], &bn.gamma, &bn.beta)
        });
        let fd_gamma = central_diff(&bn.gamma, |t| {
            loss_for(&[w0.clone(), w1.clone()], t, &bn.beta)
        });
        let fd_beta = central_diff(&bn.beta, |t| {
            loss_for(&[w0.clone(), w1.clone()], &bn.gamma, t)
        });

        assert_close(grads[0].g_w.data(), fd_w0.data(), 1e-4);
        assert_close(grads[1].g_w.data(), fd_w1.data(), 1e-4);
        assert_close(grads[0].g_gamma.as_ref().unwrap().data(), fd_gamma.data(), 1e-4);
        assert_close(grads[0].g_beta.as_ref().unwrap().data(), fd_beta.data(), 1e-4);
    }

    #[test]
    fn fp32_gradients_match_finite_differences_bn_then_act() {
        gradcheck_end_to_end(BnOrder::BnThenAct, Activation::HardTanh);
    }

    #[test]
    fn fp32_gradients_match_finite_differences_act_then_bn() {
        gradcheck_end_to_end(BnOrder::ActThenBn, Activation::Relu);
    }

    #[test]
    fn ste_gives_nonzero_gradients_despite_flat_loss() {
        let cfg = TrainConfig::for_precision(Precision::Binary);
        let mut rng = Rng::new(7);
        let mut model = glorot_init(&cfg, &tiny_topology(), &mut rng).unwrap();
        let x = random_batch(&mut rng, 4, 6);
        let labels = vec![0, 1, 2, 0];

        let (traces, logits) = forward_train(&mut model, &x).unwrap();
        let (loss_a, g_logits) = softmax_xent(&logits, &labels).unwrap();
        let grads = backward_pass(&model, &traces, &g_logits).unwrap();
        let total: f64 = grads.iter().map(|g| g.g_w.data().iter().map(|v| v.abs()).sum::<f64>()).sum();
        assert!(total > 0.0, "STE must deliver nonzero weight gradients");

        // Nudging a master weight within its quantization cell (sign
        // unchanged) leaves the loss identical.
        let mut model2 = model.clone();
        let w = &mut model2.layers[0].weights;
        let old = w.data()[0];
        let nudged = if old >= 0.0 { old / 2.0 + 0.25 } else { old / 2.0 - 0.25 };
        w.data_mut()[0] = nudged;
        assert_eq!(nudged >= 0.0, old >= 0.0, "same quantization cell");
        let (_, logits2) = forward_train(&mut model2, &x).unwrap();
        let (loss_b, _) = softmax_xent(&logits2, &labels).unwrap();
        assert_eq!(loss_a, loss_b, "loss is flat within a quantization cell");
    }

    #[test]
    fn evaluate_counts_errors_and_is_deterministic() {
        let cfg = TrainConfig::for_precision(Precision::Float32);
        let mut rng = Rng::new(8);
        let model = glorot_init(&cfg, &tiny_topology(), &mut rng).unwrap();
        let ds = crate::dataio::synthetic_blobs(&mut rng, 30, 3, 6, 5.0).unwrap();
        let e1 = evaluate(&model, &ds).unwrap();
        let e2 = evaluate(&model, &ds).unwrap();
        assert_eq!(e1, e2);
        assert!((0.0..=1.0).contains(&e1));
    }

    #[test]
    fn evaluate_matches_known_biased_model() {
        // Force a model that always predicts class 0 on balanced labels.
        let topo = TopologySpec {
            name: "bias0".into(),
            input_shape: vec![2],
            num_classes: 2,
            layers: vec![LayerSpec::fc_output(2, 2)],
        };
        let cfg = TrainConfig::for_precision(Precision::Float32);
        let mut rng = Rng::new(9);
        let mut model = glorot_init(&cfg, &topo, &mut rng).unwrap();
        // Column 0 large positive weights, column 1 negative: argmax always 0.
        model.layers[0].weights = Tensor::new([2, 2], vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let images = Tensor::new([4, 2], vec![0.2, 0.4, 0.6, 0.8, 0.1, 0.3, 0.5, 0.7]).unwrap();
        let ds = Dataset::new(images, vec![0, 1, 0, 1], 2).unwrap();
        let err = evaluate(&model, &ds).unwrap();
        assert_eq!(err, 0.5, "always-class-0 on balanced 2-class data");
    }
}
