//! Fully-connected forward and backward kernels.

use crate::error::Result;
use crate::tensor::Tensor;

/// `s = a_prev_q · w_q` for a `[batch × in]` activation batch and an
/// `[in × out]` weight matrix.
pub fn fc_forward(a_prev_q: &Tensor, w_q: &Tensor) -> Result<Tensor> {
    a_prev_q.matmul(w_q)
}

/// Gradients of the FC layer with respect to its (quantized) inputs:
/// `g_a_prev = g_s · w_qᵀ` and `g_w = a_prev_qᵀ · g_s`.
pub fn fc_backward(g_s: &Tensor, a_prev_q: &Tensor, w_q: &Tensor) -> Result<(Tensor, Tensor)> {
    let g_a_prev = g_s.matmul_nt(w_q)?;
    let g_w = a_prev_q.matmul_tn(g_s)?;
    Ok((g_a_prev, g_w))
}
