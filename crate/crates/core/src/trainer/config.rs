//! Training hyperparameters and their per-precision defaults.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantize::Precision;
use crate::topology::Activation;

/// Where batch normalization sits relative to the activation function
/// inside one hidden block. Binary nets default to normalizing first and
/// letting the sign quantizer act on the normalized value; other nets
/// default to activation first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BnOrder {
    BnThenAct,
    ActThenBn,
}

impl fmt::Display for BnOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BnOrder::BnThenAct => "bn_then_act",
            BnOrder::ActThenBn => "act_then_bn",
        };
        write!(f, "{s}")
    }
}

impl FromStr for BnOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<BnOrder> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bn_then_act" => Ok(BnOrder::BnThenAct),
            "act_then_bn" => Ok(BnOrder::ActThenBn),
            other => Err(Error::arg(format!("unknown bn order '{other}'"))),
        }
    }
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub weight_precision: Precision,
    pub activation_precision: Precision,
    pub activation_fn: Activation,
    pub bn_order: BnOrder,
    pub epochs: usize,
    pub batch_size: usize,
    /// Initial learning rate η₀.
    pub learning_rate: f64,
    /// Per-epoch decay λ: η_epoch = η₀ · λ^epoch.
    pub lr_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    /// Per-layer learning-rate scales γ_i for the weight layers; empty
    /// means 1.0 everywhere.
    #[serde(default)]
    pub per_layer_lr_scale: Vec<f64>,
    pub seed: u64,
    pub clip_lo: f64,
    pub clip_hi: f64,
}

impl TrainConfig {
    /// Defaults for a given weight precision: activations share the weight
    /// precision; Binary nets use hardtanh with batch norm before the
    /// activation, everything else uses ReLU with batch norm after it.
    pub fn for_precision(precision: Precision) -> TrainConfig {
        let binary = precision.is_binary();
        TrainConfig {
            weight_precision: precision,
            activation_precision: precision,
            activation_fn: if binary {
                Activation::HardTanh
            } else {
                Activation::Relu
            },
            bn_order: if binary {
                BnOrder::BnThenAct
            } else {
                BnOrder::ActThenBn
            },
            epochs: 10,
            batch_size: 100,
            learning_rate: 1e-3,
            lr_decay: 0.98,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            per_layer_lr_scale: Vec::new(),
            seed: 0,
            clip_lo: -1.0,
            clip_hi: 1.0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> TrainConfig {
        self.seed = seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> TrainConfig {
        self.epochs = epochs;
        self
    }

    pub fn with_activation(mut self, act: Activation) -> TrainConfig {
        self.activation_fn = act;
        self
    }

    /// Learning rate in force during `epoch` (0-based).
    pub fn lr_at_epoch(&self, epoch: usize) -> f64 {
        self.learning_rate * self.lr_decay.powi(epoch as i32)
    }

    /// γ_i for weight layer `i` (1.0 when unset).
    pub fn layer_lr_scale(&self, layer: usize) -> f64 {
        self.per_layer_lr_scale.get(layer).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::arg("epochs must be >= 1"));
        }
        if self.batch_size < 2 {
            return Err(Error::arg("batch_size must be >= 2 (batch norm)"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::arg("learning_rate must be positive"));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::arg("lr_decay must be in (0, 1]"));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::arg(format!("{name} must be in (0, 1)")));
            }
        }
        if !(self.adam_epsilon > 0.0) {
            return Err(Error::arg("adam_epsilon must be positive"));
        }
        if self.activation_fn == Activation::None {
            return Err(Error::arg("activation_fn must be hardtanh or relu"));
        }
        if !(self.clip_lo < self.clip_hi) {
            return Err(Error::arg("clip_lo must be below clip_hi"));
        }
        if self.per_layer_lr_scale.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::arg("per-layer lr scales must be positive"));
        }
        Ok(())
    }
}
