//! Central-difference gradient oracle shared by the kernel unit tests.

use crate::tensor::Tensor;

const STEP: f64 = 1e-5;

/// Numerical gradient of a scalar function with respect to every element
/// of `x`, via central differences with step 1e-5.
pub fn central_diff(x: &Tensor, mut f: impl FnMut(&Tensor) -> f64) -> Tensor {
    let mut grad = Tensor::zeros(x.shape().to_vec());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + STEP;
        let plus = f(&probe);
        probe.data_mut()[i] = orig - STEP;
        let minus = f(&probe);
        probe.data_mut()[i] = orig;
        grad.data_mut()[i] = (plus - minus) / (2.0 * STEP);
    }
    grad
}

/// Assert elementwise closeness under `|a - b| / max(|a|, |b|, 1) < tol`.
pub fn assert_close(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len(), "length mismatch");
    for (i, (a, b)) in got.iter().zip(want).enumerate() {
        let scale = a.abs().max(b.abs()).max(1.0);
        let rel = (a - b).abs() / scale;
        assert!(
            rel < tol,
            "element {i}: got {a}, want {b} (relative error {rel:.3e} >= {tol:.1e})"
        );
    }
}
