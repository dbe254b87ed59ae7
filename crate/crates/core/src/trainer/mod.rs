//! Quantization-aware training: high-precision master weights drive a
//! quantized forward pass, gradients flow back through the straight-through
//! estimator, and Adam updates (with weight clipping) keep the master copy
//! inside the representable range.

pub mod checkpoint;
pub mod config;
pub mod fit;
pub mod model;
pub mod optim;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{BnOrder, TrainConfig};
pub use fit::{fit, fit_observed, EpochMetrics};
pub use model::{
    backward_pass, evaluate, forward_infer, forward_train, glorot_init, LayerGrads, LayerState,
    LayerTrace, ModelState,
};
pub use optim::adam_step;
