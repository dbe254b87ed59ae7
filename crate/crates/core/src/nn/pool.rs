//! Max-pooling kernels, NCHW layout.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::topology::pool_out_dim;

/// Forward max pool. Returns the pooled tensor and, for each output
/// element, the flat index into `input` of the maximum that produced it.
/// Ties go to the first position in row-major window order.
pub fn maxpool_forward(
    input: &Tensor,
    window: usize,
    stride: usize,
) -> Result<(Tensor, Vec<usize>)> {
    let (n, c, h, w) = match *input.shape() {
        [n, c, h, w] => (n, c, h, w),
        ref other => {
            return Err(Error::shape(format!("maxpool input must be NCHW, got {other:?}")));
        }
    };
    let oh = pool_out_dim(h, window, stride)?;
    let ow = pool_out_dim(w, window, stride)?;
    let mut out = Tensor::zeros([n, c, oh, ow]);
    let mut argmax = vec![0usize; out.len()];
    let x = input.data();
    let o = out.data_mut();
    for ni in 0..n {
        for ci in 0..c {
            let plane = (ni * c + ci) * h * w;
            for ohi in 0..oh {
                for owi in 0..ow {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_idx = 0usize;
                    for khi in 0..window {
                        for kwi in 0..window {
                            let idx = plane + (ohi * stride + khi) * w + (owi * stride + kwi);
                            if x[idx] > best {
                                best = x[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    let oi = ((ni * c + ci) * oh + ohi) * ow + owi;
                    o[oi] = best;
                    argmax[oi] = best_idx;
                }
            }
        }
    }
    Ok((out, argmax))
}

/// Route each output gradient back to the argmax position recorded by the
/// forward pass. Overlapping windows accumulate.
pub fn maxpool_backward(
    g_out: &Tensor,
    argmax: &[usize],
    input_shape: &[usize],
) -> Result<Tensor> {
    if g_out.len() != argmax.len() {
        return Err(Error::shape(format!(
            "maxpool backward: {} gradients but {} argmax entries",
            g_out.len(),
            argmax.len()
        )));
    }
    let mut g_in = Tensor::zeros(input_shape.to_vec());
    let gi = g_in.data_mut();
    for (g, &idx) in g_out.data().iter().zip(argmax) {
        if idx >= gi.len() {
            return Err(Error::shape(format!(
                "maxpool backward: argmax {idx} out of bounds for input of {} elements",
                gi.len()
            )));
        }
        gi[idx] += g;
    }
    Ok(g_in)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn all_ones_ties_to_first_position() {
        let x = Tensor::full([1, 1, 2, 2], 1.0);
        let (y, argmax) = maxpool_forward(&x, 2, 2).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1, 1]);
        assert_eq!(y.data(), &[1.0]);
        assert_eq!(argmax, vec![0], "tie resolves to window position (0,0)");

        let g = Tensor::new([1, 1, 1, 1], vec![2.5]).unwrap();
        let g_in = maxpool_backward(&g, &argmax, x.shape()).unwrap();
        assert_eq!(g_in.data(), &[2.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn selects_maximum_per_window() {
        let x = Tensor::new(
            [1, 1, 4, 4],
            vec![
                1.0, 2.0, 5.0, 6.0, //
                3.0, 4.0, 7.0, 8.0, //
                -1.0, -2.0, 0.0, 0.5, //
                -3.0, -4.0, 0.25, 0.125,
            ],
        )
        .unwrap();
        let (y, _) = maxpool_forward(&x, 2, 2).unwrap();
        assert_eq!(y.data(), &[4.0, 8.0, -1.0, 0.5]);
    }

    #[test]
    fn gradient_mass_is_conserved() {
        let mut rng = Rng::new(9);
        // Overlapping 3x3 windows with stride 2 (the AlexNet pooling shape).
        let x = rng.uniform(-1.0, 1.0, [2, 3, 7, 7]).unwrap();
        let (y, argmax) = maxpool_forward(&x, 3, 2).unwrap();
        let g = rng.uniform(0.1, 1.0, y.shape().to_vec()).unwrap();
        let g_in = maxpool_backward(&g, &argmax, x.shape()).unwrap();
        let routed: f64 = g_in.data().iter().sum();
        let incoming: f64 = g.data().iter().sum();
        assert!((routed - incoming).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_shapes() {
        let x = Tensor::zeros([2, 2, 2]);
        assert!(maxpool_forward(&x, 2, 2).is_err());
        let x = Tensor::zeros([1, 1, 2, 2]);
        assert!(maxpool_forward(&x, 3, 1).is_err(), "window exceeds input");
    }
}
