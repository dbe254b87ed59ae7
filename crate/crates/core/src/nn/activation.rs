//! Elementwise activations: hard tanh `min(1, max(-1, x))` and ReLU
//! `max(0, x)`, with their subgradients. The hard-tanh derivative at
//! exactly ±1 is defined as 0; the ReLU derivative at 0 is 0.

use crate::error::Result;
use crate::tensor::Tensor;
use crate::topology::Activation;

pub fn hardtanh(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

pub fn hardtanh_deriv(x: f64) -> f64 {
    if x > -1.0 && x < 1.0 {
        1.0
    } else {
        0.0
    }
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub fn relu_deriv(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Apply `act` elementwise; `Activation::None` is the identity.
pub fn act_forward(act: Activation, x: &Tensor) -> Tensor {
    match act {
        Activation::HardTanh => x.map(hardtanh),
        Activation::Relu => x.map(relu),
        Activation::None => x.clone(),
    }
}

/// Chain rule through the activation: `g_out * act'(pre)`, where `pre` is
/// the tensor the activation was applied to.
pub fn act_backward(act: Activation, g_out: &Tensor, pre: &Tensor) -> Result<Tensor> {
    match act {
        Activation::HardTanh => g_out.zip_map(pre, |g, x| g * hardtanh_deriv(x)),
        Activation::Relu => g_out.zip_map(pre, |g, x| g * relu_deriv(x)),
        Activation::None => {
            // Shape check for parity with the other arms.
            g_out.zip_map(pre, |g, _| g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardtanh_values() {
        assert_eq!(hardtanh(0.5), 0.5);
        assert_eq!(hardtanh(3.0), 1.0);
        assert_eq!(hardtanh(-3.0), -1.0);
    }

    #[test]
    fn hardtanh_boundary_derivative_is_zero() {
        assert_eq!(hardtanh_deriv(1.0), 0.0);
        assert_eq!(hardtanh_deriv(-1.0), 0.0);
        assert_eq!(hardtanh_deriv(0.999), 1.0);
        assert_eq!(hardtanh_deriv(-0.999), 1.0);
        assert_eq!(hardtanh_deriv(1.001), 0.0);
    }

    #[test]
    fn relu_values_and_derivative() {
        assert_eq!(relu(-2.0), 0.0);
        assert_eq!(relu(2.0), 2.0);
        assert_eq!(relu_deriv(2.0), 1.0);
        assert_eq!(relu_deriv(-2.0), 0.0);
        assert_eq!(relu_deriv(0.0), 0.0);
    }

    #[test]
    fn tensor_paths() {
        let x = Tensor::new([4], vec![-3.0, -0.5, 0.5, 3.0]).unwrap();
        assert_eq!(
            act_forward(Activation::HardTanh, &x).data(),
            &[-1.0, -0.5, 0.5, 1.0]
        );
        assert_eq!(act_forward(Activation::Relu, &x).data(), &[0.0, 0.0, 0.5, 3.0]);
        assert_eq!(act_forward(Activation::None, &x), x);

        let g = Tensor::full([4], 2.0);
        assert_eq!(
            act_backward(Activation::HardTanh, &g, &x).unwrap().data(),
            &[0.0, 2.0, 2.0, 0.0]
        );
        assert_eq!(
            act_backward(Activation::Relu, &g, &x).unwrap().data(),
            &[0.0, 0.0, 2.0, 2.0]
        );
        assert_eq!(act_backward(Activation::None, &g, &x).unwrap(), g);
    }
}
