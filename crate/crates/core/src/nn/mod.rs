//! Layer-level forward and backward kernels: fully-connected, 2-D
//! convolution, max pooling, batch normalization, activations, and the
//! softmax cross-entropy head. Each backward kernel is verified against a
//! central-difference oracle in its unit tests.

mod activation;
mod batchnorm;
mod conv;
#[cfg(test)]
pub(crate) mod gradcheck;
mod linear;
mod loss;
mod pool;

pub use activation::{act_backward, act_forward, hardtanh, hardtanh_deriv, relu, relu_deriv};
pub use batchnorm::{
    batchnorm_backward, batchnorm_forward_infer, batchnorm_forward_train, BnCache, BnParams,
    BN_EPSILON, BN_MOMENTUM,
};
pub use conv::{conv2d_backward, conv2d_forward, conv2d_forward_im2col};
pub use linear::{fc_backward, fc_forward};
pub use loss::{argmax_rows, softmax_xent};
pub use pool::{maxpool_backward, maxpool_forward};
