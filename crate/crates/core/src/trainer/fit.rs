//! The full training loop: shuffled mini-batches, quantized propagation,
//! Adam with weight clipping, per-epoch learning-rate decay, and validation.

use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::nn::softmax_xent;
use crate::rng::{derive_seed, Rng};
use crate::topology::TopologySpec;
use crate::trainer::config::TrainConfig;
use crate::trainer::model::{backward_pass, evaluate, forward_train, glorot_init, ModelState};
use crate::trainer::optim::adam_step;

/// One row of the per-epoch training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub learning_rate: f64,
    pub train_loss: f64,
    pub valid_error: f64,
}

/// Train a model. Deterministic in `(config, topology, datasets, seed)`:
/// the same inputs produce bit-identical models and metrics.
pub fn fit(
    config: &TrainConfig,
    topology: &TopologySpec,
    train_set: &Dataset,
    valid_set: &Dataset,
) -> Result<(ModelState, Vec<EpochMetrics>)> {
    fit_observed(config, topology, train_set, valid_set, |_| {})
}

/// [`fit`] with a hook invoked after every optimizer step (used to verify
/// step-level invariants such as the weight clip).
pub fn fit_observed(
    config: &TrainConfig,
    topology: &TopologySpec,
    train_set: &Dataset,
    valid_set: &Dataset,
    mut on_step: impl FnMut(&ModelState),
) -> Result<(ModelState, Vec<EpochMetrics>)> {
    config.validate()?;
    if train_set.is_empty() || valid_set.is_empty() {
        return Err(Error::arg("training and validation sets must be non-empty"));
    }
    if train_set.len() < 2 {
        return Err(Error::arg("training set must have at least 2 examples (batch norm)"));
    }

    let mut init_rng = Rng::new(derive_seed(config.seed, "glorot-init"));
    let mut model = glorot_init(config, topology, &mut init_rng)?;
    let mut shuffle_rng = Rng::new(derive_seed(config.seed, "epoch-shuffle"));

    let mut metrics = Vec::with_capacity(config.epochs);
    let mut indices: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..config.epochs {
        let lr = config.lr_at_epoch(epoch);
        shuffle_rng.shuffle(&mut indices);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for chunk in batches(&indices, config.batch_size) {
            let (x, y) = train_set.gather(chunk)?;
            let (traces, logits) = forward_train(&mut model, &x)?;
            let (loss, g_logits) = softmax_xent(&logits, &y)?;
            let grads = backward_pass(&model, &traces, &g_logits)?;
            adam_step(&mut model, &grads, lr)?;
            on_step(&model);
            loss_sum += loss * chunk.len() as f64;
            seen += chunk.len();
        }
        let train_loss = loss_sum / seen as f64;
        let valid_error = evaluate(&model, valid_set)?;
        log::info!(
            "epoch {epoch}: lr {lr:.6}, train loss {train_loss:.4}, valid error {:.2}%",
            100.0 * valid_error
        );
        metrics.push(EpochMetrics {
            epoch,
            learning_rate: lr,
            train_loss,
            valid_error,
        });
    }
    Ok((model, metrics))
}

/// Mini-batch index windows. A trailing remainder of one example is folded
/// into the previous batch (batch norm needs at least two rows); when the
/// whole set is a single example, there is no valid batch.
fn batches(indices: &[usize], batch_size: usize) -> impl Iterator<Item = &[usize]> {
    let n = indices.len();
    let mut cuts = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = (start + batch_size).min(n);
        if n - end == 1 {
            end = n;
        }
        cuts.push((start, end));
        start = end;
    }
    cuts.retain(|(a, b)| b - a >= 2);
    cuts.into_iter().map(move |(a, b)| &indices[a..b])
}
