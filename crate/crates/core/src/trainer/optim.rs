//! One bias-corrected Adam step over all parameter tensors, with the
//! master-weight clip to `[clip_lo, clip_hi]` applied afterwards. Batch
//! norm parameters are updated by the same rule but never clipped.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::trainer::model::{LayerGrads, ModelState, Moments};

fn adam_update(
    param: &mut Tensor,
    moments: &mut Moments,
    grad: &Tensor,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    bias1: f64,
    bias2: f64,
) -> Result<()> {
    if param.shape() != grad.shape() {
        return Err(Error::shape(format!(
            "adam: parameter shape {:?} vs gradient {:?}",
            param.shape(),
            grad.shape()
        )));
    }
    let p = param.data_mut();
    let m = moments.m.data_mut();
    let v = moments.v.data_mut();
    let g = grad.data();
    for i in 0..p.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// Apply one optimizer step with learning rate `lr` (already decayed for
/// the current epoch). Increments the model's step counter.
pub fn adam_step(model: &mut ModelState, grads: &[LayerGrads], lr: f64) -> Result<()> {
    if grads.len() != model.layers.len() {
        return Err(Error::shape(format!(
            "{} gradient sets for {} layers",
            grads.len(),
            model.layers.len()
        )));
    }
    let cfg = model.config.clone();
    let t = model.step + 1;
    let bias1 = 1.0 - cfg.beta1.powi(t as i32);
    let bias2 = 1.0 - cfg.beta2.powi(t as i32);
    for (i, (layer, g)) in model.layers.iter_mut().zip(grads).enumerate() {
        let layer_lr = lr * cfg.layer_lr_scale(i);
        adam_update(
            &mut layer.weights,
            &mut layer.w_moments,
            &g.g_w,
            layer_lr,
            cfg.beta1,
            cfg.beta2,
            cfg.adam_epsilon,
            bias1,
            bias2,
        )?;
        layer
            .weights
            .map_inplace(|w| w.clamp(cfg.clip_lo, cfg.clip_hi));

        if let Some(bn) = &mut layer.bn {
            if let (Some(gg), Some(mo)) = (&g.g_gamma, layer.gamma_moments.as_mut()) {
                adam_update(
                    &mut bn.gamma,
                    mo,
                    gg,
                    layer_lr,
                    cfg.beta1,
                    cfg.beta2,
                    cfg.adam_epsilon,
                    bias1,
                    bias2,
                )?;
            }
            if let (Some(gb), Some(mo)) = (&g.g_beta, layer.beta_moments.as_mut()) {
                adam_update(
                    &mut bn.beta,
                    mo,
                    gb,
                    layer_lr,
                    cfg.beta1,
                    cfg.beta2,
                    cfg.adam_epsilon,
                    bias1,
                    bias2,
                )?;
            }
        }
    }
    model.step = t;
    Ok(())
}
