//! 2-D convolution kernels (direct and im2col), NCHW layout.
//!
//! Convolution here is the machine-learning convention (cross-correlation,
//! no kernel flip) with implicit zero padding. The direct path is the
//! reference implementation; the im2col path lowers to a matrix product and
//! is tested for exact agreement with it.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::topology::conv_out_dim;

fn conv_dims(
    input: &Tensor,
    weight: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<(usize, usize, usize, usize, usize, usize, usize, usize)> {
    let (n, c, h, w) = match *input.shape() {
        [n, c, h, w] => (n, c, h, w),
        ref other => {
            return Err(Error::shape(format!("conv input must be NCHW, got {other:?}")));
        }
    };
    let (oc, ic, kh, kw) = match *weight.shape() {
        [oc, ic, kh, kw] => (oc, ic, kh, kw),
        ref other => {
            return Err(Error::shape(format!(
                "conv weight must be [out_ch, in_ch, k, k], got {other:?}"
            )));
        }
    };
    if ic != c {
        return Err(Error::shape(format!(
            "conv channels mismatch: input has {c}, weight expects {ic}"
        )));
    }
    if kh != kw {
        return Err(Error::shape(format!("conv kernel must be square, got {kh}x{kw}")));
    }
    let oh = conv_out_dim(h, kh, stride, padding)?;
    let ow = conv_out_dim(w, kw, stride, padding)?;
    Ok((n, c, h, w, oc, kh, oh, ow))
}

/// Direct convolution: output `[n, oc, oh, ow]` from input `[n, c, h, w]`
/// and weight `[oc, c, k, k]`.
pub fn conv2d_forward(
    input: &Tensor,
    weight: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<Tensor> {
    let (n, c, h, w, oc, k, oh, ow) = conv_dims(input, weight, stride, padding)?;
    let mut out = Tensor::zeros([n, oc, oh, ow]);
    let x = input.data();
    let wt = weight.data();
    let o = out.data_mut();
    for ni in 0..n {
        for oci in 0..oc {
            for ohi in 0..oh {
                for owi in 0..ow {
                    let mut acc = 0.0;
                    for ci in 0..c {
                        for khi in 0..k {
                            let ih = (ohi * stride + khi) as isize - padding as isize;
                            if ih < 0 || ih >= h as isize {
                                continue;
                            }
                            for kwi in 0..k {
                                let iw = (owi * stride + kwi) as isize - padding as isize;
                                if iw < 0 || iw >= w as isize {
                                    continue;
                                }
                                let xi = ((ni * c + ci) * h + ih as usize) * w + iw as usize;
                                let wi = ((oci * c + ci) * k + khi) * k + kwi;
                                acc = x[xi].mul_add(wt[wi], acc);
                            }
                        }
                    }
                    o[((ni * oc + oci) * oh + ohi) * ow + owi] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// im2col lowering: gather input patches into a `[n·oh·ow, c·k·k]` matrix,
/// multiply by the reshaped weights, and scatter back to NCHW.
pub fn conv2d_forward_im2col(
    input: &Tensor,
    weight: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<Tensor> {
    let (n, c, h, w, oc, k, oh, ow) = conv_dims(input, weight, stride, padding)?;
    let patch = c * k * k;
    let rows = n * oh * ow;
    let mut cols = Tensor::zeros([rows, patch]);
    {
        let x = input.data();
        let cd = cols.data_mut();
        let mut row = 0;
        for ni in 0..n {
            for ohi in 0..oh {
                for owi in 0..ow {
                    let base = row * patch;
                    for ci in 0..c {
                        for khi in 0..k {
                            let ih = (ohi * stride + khi) as isize - padding as isize;
                            for kwi in 0..k {
                                let iw = (owi * stride + kwi) as isize - padding as isize;
                                let dst = base + (ci * k + khi) * k + kwi;
                                if ih >= 0 && ih < h as isize && iw >= 0 && iw < w as isize {
                                    cd[dst] = x[((ni * c + ci) * h + ih as usize) * w + iw as usize];
                                }
                            }
                        }
                    }
                    row += 1;
                }
            }
        }
    }
    let w_mat = weight.reshape([oc, patch])?;
    let prod = cols.matmul_nt(&w_mat)?; // [rows, oc]
    let mut out = Tensor::zeros([n, oc, oh, ow]);
    {
        let p = prod.data();
        let o = out.data_mut();
        let mut row = 0;
        for ni in 0..n {
            for ohi in 0..oh {
                for owi in 0..ow {
                    for oci in 0..oc {
                        o[((ni * oc + oci) * oh + ohi) * ow + owi] = p[row * oc + oci];
                    }
                    row += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of the direct convolution with respect to input and weights.
pub fn conv2d_backward(
    g_out: &Tensor,
    input: &Tensor,
    weight: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<(Tensor, Tensor)> {
    let (n, c, h, w, oc, k, oh, ow) = conv_dims(input, weight, stride, padding)?;
    if g_out.shape() != [n, oc, oh, ow] {
        return Err(Error::shape(format!(
            "conv g_out must be [{n}, {oc}, {oh}, {ow}], got {:?}",
            g_out.shape()
        )));
    }
    let mut g_in = Tensor::zeros([n, c, h, w]);
    let mut g_w = Tensor::zeros([oc, c, k, k]);
    let x = input.data();
    let wt = weight.data();
    let go = g_out.data();
    let gi = g_in.data_mut();
    let gw = g_w.data_mut();
    for ni in 0..n {
        for oci in 0..oc {
            for ohi in 0..oh {
                for owi in 0..ow {
                    let g = go[((ni * oc + oci) * oh + ohi) * ow + owi];
                    if g == 0.0 {
                        continue;
                    }
                    for ci in 0..c {
                        for khi in 0..k {
                            let ih = (ohi * stride + khi) as isize - padding as isize;
                            if ih < 0 || ih >= h as isize {
                                continue;
                            }
                            for kwi in 0..k {
                                let iw = (owi * stride + kwi) as isize - padding as isize;
                                if iw < 0 || iw >= w as isize {
                                    continue;
                                }
                                let xi = ((ni * c + ci) * h + ih as usize) * w + iw as usize;
                                let wi = ((oci * c + ci) * k + khi) * k + kwi;
                                gi[xi] = g.mul_add(wt[wi], gi[xi]);
                                gw[wi] = g.mul_add(x[xi], gw[wi]);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((g_in, g_w))
}
