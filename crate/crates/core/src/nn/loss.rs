//! Softmax cross-entropy over a batch of logits.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean cross-entropy of `logits` `[batch × classes]` against integer
/// `labels`, plus the gradient `(softmax - onehot) / batch` with respect to
/// the logits. Softmax is computed with the max-subtraction trick.
pub fn softmax_xent(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    let (batch, classes) = logits.dim2()?;
    if labels.len() != batch {
        return Err(Error::shape(format!(
            "{batch} logit rows but {} labels",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::arg(format!(
            "label {bad} out of range for {classes} classes"
        )));
    }

    let ld = logits.data();
    let mut grad = Tensor::zeros([batch, classes]);
    let gd = grad.data_mut();
    let inv_batch = 1.0 / batch as f64;
    let mut loss = 0.0;
    for row in 0..batch {
        let r = &ld[row * classes..(row + 1) * classes];
        let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for &v in r {
            denom += (v - max).exp();
        }
        let log_denom = denom.ln();
        // -log p[label] = log_denom - (logit[label] - max)
        loss += log_denom - (r[labels[row]] - max);
        for c in 0..classes {
            let p = (r[c] - max).exp() / denom;
            gd[row * classes + c] = p * inv_batch;
        }
        gd[row * classes + labels[row]] -= inv_batch;
    }
    Ok((loss * inv_batch, grad))
}

/// Index of the largest logit per row (ties to the first).
pub fn argmax_rows(logits: &Tensor) -> Result<Vec<usize>> {
    let (batch, classes) = logits.dim2()?;
    let ld = logits.data();
    let mut out = Vec::with_capacity(batch);
    for row in 0..batch {
        let r = &ld[row * classes..(row + 1) * classes];
        let mut best = 0;
        for (c, &v) in r.iter().enumerate() {
            if v > r[best] {
                best = c;
            }
        }
        out.push(best);
    }
    Ok(out)
}
