//! Batch normalization over `[batch × features]` activations.
//!
//! Train mode normalizes by the batch mean and (biased) batch variance,
//! applies the learned scale/shift, and updates the running statistics with
//! momentum; inference mode normalizes by the running statistics.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Variance floor added inside the square root.
pub const BN_EPSILON: f64 = 1e-5;
/// Weight of the previous running statistic in the exponential update
/// `running = momentum * running + (1 - momentum) * batch`.
pub const BN_MOMENTUM: f64 = 0.9;

/// Learned and tracked parameters of one batch-norm stage.
#[derive(Debug, Clone, PartialEq)]
pub struct BnParams {
    pub gamma: Tensor,
    pub beta: Tensor,
    pub running_mean: Tensor,
    pub running_var: Tensor,
}

impl BnParams {
    /// Fresh parameters: gamma = 1, beta = 0, running mean 0, running var 1.
    pub fn new(features: usize) -> BnParams {
        BnParams {
            gamma: Tensor::full([features], 1.0),
            beta: Tensor::zeros([features]),
            running_mean: Tensor::zeros([features]),
            running_var: Tensor::full([features], 1.0),
        }
    }

    pub fn features(&self) -> usize {
        self.gamma.len()
    }
}

/// Forward cache needed by the backward pass.
#[derive(Debug, Clone)]
pub struct BnCache {
    /// Normalized activations before scale/shift, `[batch × features]`.
    x_hat: Tensor,
    /// Per-feature `1 / sqrt(var + eps)`.
    std_inv: Vec<f64>,
}

fn check_features(x: &Tensor, params: &BnParams) -> Result<(usize, usize)> {
    let (batch, features) = x.dim2()?;
    if features != params.features() {
        return Err(Error::shape(format!(
            "batchnorm has {} features but input has {features}",
            params.features()
        )));
    }
    Ok((batch, features))
}

/// Training-mode forward: normalize by batch statistics, update running
/// statistics in `params`, and return the output plus backward cache.
pub fn batchnorm_forward_train(
    x: &Tensor,
    params: &mut BnParams,
    eps: f64,
    momentum: f64,
) -> Result<(Tensor, BnCache)> {
    let (batch, features) = check_features(x, params)?;
    if batch < 2 {
        return Err(Error::arg(format!(
            "batchnorm train mode needs batch size >= 2, got {batch}"
        )));
    }
    let inv_n = 1.0 / batch as f64;
    let mut mean = vec![0.0; features];
    let mut var = vec![0.0; features];
    let xd = x.data();
    for row in 0..batch {
        for f in 0..features {
            mean[f] += xd[row * features + f];
        }
    }
    for m in mean.iter_mut() {
        *m *= inv_n;
    }
    for row in 0..batch {
        for f in 0..features {
            let d = xd[row * features + f] - mean[f];
            var[f] += d * d;
        }
    }
    for v in var.iter_mut() {
        *v *= inv_n;
    }

    let std_inv: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
    let mut x_hat = Tensor::zeros([batch, features]);
    let mut y = Tensor::zeros([batch, features]);
    {
        let xh = x_hat.data_mut();
        for row in 0..batch {
            for f in 0..features {
                xh[row * features + f] = (xd[row * features + f] - mean[f]) * std_inv[f];
            }
        }
        let yd = y.data_mut();
        let gamma = params.gamma.data();
        let beta = params.beta.data();
        for row in 0..batch {
            for f in 0..features {
                yd[row * features + f] = gamma[f].mul_add(xh[row * features + f], beta[f]);
            }
        }
    }

    let rm = params.running_mean.data_mut();
    let rv = params.running_var.data_mut();
    for f in 0..features {
        rm[f] = momentum * rm[f] + (1.0 - momentum) * mean[f];
        rv[f] = momentum * rv[f] + (1.0 - momentum) * var[f];
    }

    Ok((y, BnCache { x_hat, std_inv }))
}

/// Inference-mode forward using the running statistics.
pub fn batchnorm_forward_infer(x: &Tensor, params: &BnParams, eps: f64) -> Result<Tensor> {
    let (batch, features) = check_features(x, params)?;
    let xd = x.data();
    let gamma = params.gamma.data();
    let beta = params.beta.data();
    let rm = params.running_mean.data();
    let rv = params.running_var.data();
    let mut y = Tensor::zeros([batch, features]);
    let yd = y.data_mut();
    for f in 0..features {
        let scale = gamma[f] / (rv[f] + eps).sqrt();
        for row in 0..batch {
            yd[row * features + f] = scale.mul_add(xd[row * features + f] - rm[f], beta[f]);
        }
    }
    Ok(y)
}

/// Backward pass from the train-mode cache. Returns `(g_x, g_gamma, g_beta)`.
pub fn batchnorm_backward(
    g_y: &Tensor,
    cache: &BnCache,
    params: &BnParams,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (batch, features) = cache.x_hat.dim2()?;
    if g_y.shape() != cache.x_hat.shape() {
        return Err(Error::shape(format!(
            "batchnorm backward: gradient shape {:?} does not match cache {:?}",
            g_y.shape(),
            cache.x_hat.shape()
        )));
    }
    let gy = g_y.data();
    let xh = cache.x_hat.data();
    let gamma = params.gamma.data();
    let inv_n = 1.0 / batch as f64;

    let mut g_beta = vec![0.0; features];
    let mut g_gamma = vec![0.0; features];
    for row in 0..batch {
        for f in 0..features {
            let g = gy[row * features + f];
            g_beta[f] += g;
            g_gamma[f] += g * xh[row * features + f];
        }
    }

    // g_x = gamma * std_inv / N * (N * g_y - Σ g_y - x_hat * Σ(g_y * x_hat))
    let mut g_x = Tensor::zeros([batch, features]);
    let gx = g_x.data_mut();
    for row in 0..batch {
        for f in 0..features {
            let i = row * features + f;
            let centered = batch as f64 * gy[i] - g_beta[f] - xh[i] * g_gamma[f];
            gx[i] = gamma[f] * cache.std_inv[f] * inv_n * centered;
        }
    }

    Ok((
        g_x,
        Tensor::new([features], g_gamma)?,
        Tensor::new([features], g_beta)?,
    ))
}
