//! Numeric representations and their quantizers.
//!
//! Three families are supported: 1-bit binary (`sign`, with Q(0) = +1),
//! signed fixed point with `WL` total bits of which `FL` are fractional
//! (round to nearest, ties away from zero, saturating), and 32-bit float,
//! whose quantizer is the identity. Quantized values are carried as f64
//! scalars on the representation's lattice; bit-level packing is a hardware
//! concern handled by the cost model, not here.
//!
//! The backward rule for every non-identity quantizer is the
//! straight-through estimator gated to `|x| <= 1`, matching the clip range
//! used for the master weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Signed fixed-point layout: `wl` total bits, MSB is the sign, `fl`
/// fractional bits, `wl - fl - 1` integer bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPointFormat {
    wl: u32,
    fl: u32,
}

impl FixedPointFormat {
    pub fn new(wl: u32, fl: u32) -> Result<FixedPointFormat> {
        if wl == 0 || wl > 63 {
            return Err(Error::arg(format!("word length must be in 1..=63, got {wl}")));
        }
        if fl > wl - 1 {
            return Err(Error::arg(format!(
                "fractional bits ({fl}) must leave room for the sign bit (wl = {wl})"
            )));
        }
        Ok(FixedPointFormat { wl, fl })
    }

    pub fn word_length(&self) -> u32 {
        self.wl
    }

    pub fn fractional_bits(&self) -> u32 {
        self.fl
    }

    /// Quantization step 2^(-fl).
    pub fn step(&self) -> f64 {
        (2.0f64).powi(-(self.fl as i32))
    }

    /// Smallest and largest representable values under two's complement:
    /// `(-2^(wl-1) * 2^(-fl), (2^(wl-1) - 1) * 2^(-fl))`.
    pub fn range(&self) -> (f64, f64) {
        let scale = self.step();
        let half = (1i64 << (self.wl - 1)) as f64;
        (-half * scale, (half - 1.0) * scale)
    }

    /// Nearest representable value, saturating at the range ends.
    /// Ties round away from zero.
    pub fn quantize(&self, x: f64) -> f64 {
        let step = self.step();
        let lo = -((1i64 << (self.wl - 1)) as f64);
        let hi = (1i64 << (self.wl - 1)) as f64 - 1.0;
        // f64::round ties away from zero, which is the documented rule.
        let units = (x / step).round().clamp(lo, hi);
        units * step
    }
}

/// Numeric representation used for a tensor (weights or activations).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precision {
    /// 1-bit values in {-1, +1}.
    Binary,
    /// Signed fixed point.
    Fixed(FixedPointFormat),
    /// 32-bit float family; modeled as the identity map.
    Float32,
}

/// The six representations studied by default, in hardware-cost order.
pub const STANDARD_PRECISIONS: [&str; 6] = ["binary", "int2", "int4", "int8", "int16", "fp32"];

impl Precision {
    /// `intN` layout with 2 bits reserved for sign + integer part and the
    /// rest fractional: `Fixed(WL = bits, FL = bits - 2)`.
    pub fn default_fixed(bits: u32) -> Result<Precision> {
        match bits {
            2 | 4 | 8 | 16 => Ok(Precision::Fixed(FixedPointFormat::new(bits, bits - 2)?)),
            _ => Err(Error::arg(format!(
                "unsupported fixed-point width {bits} (expected 2, 4, 8 or 16)"
            ))),
        }
    }

    /// Storage bits per value: 1 for binary, WL for fixed point, 32 for float.
    pub fn bit_width(&self) -> u32 {
        match self {
            Precision::Binary => 1,
            Precision::Fixed(f) => f.word_length(),
            Precision::Float32 => 32,
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Precision::Binary)
    }

    /// Identity-quantizer representations need no STE gating.
    pub fn is_identity(&self) -> bool {
        matches!(self, Precision::Float32)
    }

    /// Scalar quantizer for this representation.
    pub fn quantize_scalar(&self, x: f64) -> f64 {
        match self {
            Precision::Binary => quantize_binary(x),
            Precision::Fixed(f) => f.quantize(x),
            Precision::Float32 => x,
        }
    }

    /// Elementwise quantization; Float32 returns the input unchanged.
    pub fn quantize_tensor(&self, t: &Tensor) -> Tensor {
        match self {
            Precision::Float32 => t.clone(),
            _ => t.map(|x| self.quantize_scalar(x)),
        }
    }

    /// Straight-through gradient: pass where `|preimage| <= 1`, zero outside
    /// (Binary and Fixed); identity everywhere for Float32.
    pub fn ste_backward(&self, grad_out: &Tensor, preimage: &Tensor) -> Result<Tensor> {
        if self.is_identity() {
            if grad_out.shape() != preimage.shape() {
                return Err(Error::shape(format!(
                    "ste_backward shape mismatch {:?} vs {:?}",
                    grad_out.shape(),
                    preimage.shape()
                )));
            }
            return Ok(grad_out.clone());
        }
        grad_out.zip_map(preimage, |g, x| if x.abs() <= 1.0 { g } else { 0.0 })
    }

    /// Canonical name ("binary", "int4", "fp32", or "fixedWL.FL").
    pub fn name(&self) -> String {
        self.to_string()
    }
}

/// Deterministic sign binarization: +1 if `x >= 0`, -1 otherwise.
pub fn quantize_binary(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Binary => write!(f, "binary"),
            Precision::Float32 => write!(f, "fp32"),
            Precision::Fixed(fmt_) => {
                let (wl, fl) = (fmt_.word_length(), fmt_.fractional_bits());
                if fl + 2 == wl && matches!(wl, 2 | 4 | 8 | 16) {
                    write!(f, "int{wl}")
                } else {
                    write!(f, "fixed{wl}.{fl}")
                }
            }
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Precision> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "binary" | "bin" => return Ok(Precision::Binary),
            "fp32" | "float32" | "float" => return Ok(Precision::Float32),
            _ => {}
        }
        if let Some(bits) = lower.strip_prefix("int") {
            let bits: u32 = bits
                .parse()
                .map_err(|_| Error::UnknownPrecision(s.to_string()))?;
            return Precision::default_fixed(bits).map_err(|_| Error::UnknownPrecision(s.to_string()));
        }
        if let Some(rest) = lower.strip_prefix("fixed") {
            if let Some((wl, fl)) = rest.split_once('.') {
                let wl: u32 = wl.parse().map_err(|_| Error::UnknownPrecision(s.to_string()))?;
                let fl: u32 = fl.parse().map_err(|_| Error::UnknownPrecision(s.to_string()))?;
                return Ok(Precision::Fixed(FixedPointFormat::new(wl, fl)?));
            }
        }
        Err(Error::UnknownPrecision(s.to_string()))
    }
}

/// The default representation set, ordered as in [`STANDARD_PRECISIONS`].
pub fn standard_precisions() -> Vec<Precision> {
    STANDARD_PRECISIONS
        .iter()
        .map(|n| n.parse().expect("standard precision names parse"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_codomain_and_zero() {
        assert_eq!(quantize_binary(0.3), 1.0);
        assert_eq!(quantize_binary(-0.2), -1.0);
        assert_eq!(quantize_binary(0.0), 1.0);
    }

    #[test]
    fn fixed_examples() {
        let f42 = FixedPointFormat::new(4, 2).unwrap();
        assert_eq!(f42.quantize(0.3), 0.25);
        assert_eq!(f42.quantize(5.0), 1.75, "saturates at (2^3 - 1) * 0.25");

        let f86 = FixedPointFormat::new(8, 6).unwrap();
        assert_eq!(f86.quantize(-0.9), -0.90625, "-58 * 2^-6 is the nearest grid point");
    }

    #[test]
    fn ties_round_away_from_zero() {
        let f42 = FixedPointFormat::new(4, 2).unwrap();
        assert_eq!(f42.quantize(0.375), 0.5);
        assert_eq!(f42.quantize(-0.375), -0.5);
    }

    #[test]
    fn representable_ranges() {
        assert_eq!(FixedPointFormat::new(4, 2).unwrap().range(), (-2.0, 1.75));
        assert_eq!(FixedPointFormat::new(2, 0).unwrap().range(), (-2.0, 1.0));
        let (lo, hi) = FixedPointFormat::new(16, 14).unwrap().range();
        assert_eq!(lo, -2.0);
        assert_eq!(hi, 2.0 - (2.0f64).powi(-14));
    }

    #[test]
    fn format_validation() {
        assert!(FixedPointFormat::new(4, 4).is_err());
        assert!(FixedPointFormat::new(0, 0).is_err());
        assert!(FixedPointFormat::new(4, 3).is_ok());
        assert!(Precision::default_fixed(3).is_err());
    }

    #[test]
    fn default_formats() {
        assert_eq!(
            Precision::default_fixed(4).unwrap(),
            Precision::Fixed(FixedPointFormat::new(4, 2).unwrap())
        );
        assert_eq!(
            Precision::default_fixed(16).unwrap(),
            Precision::Fixed(FixedPointFormat::new(16, 14).unwrap())
        );
        assert_eq!(
            Precision::default_fixed(2).unwrap(),
            Precision::Fixed(FixedPointFormat::new(2, 0).unwrap())
        );
    }

    #[test]
    fn tensor_quantization() {
        let t = Tensor::new([3], vec![0.3, -0.2, 0.0]).unwrap();
        let q = Precision::Binary.quantize_tensor(&t);
        assert_eq!(q.data(), &[1.0, -1.0, 1.0]);

        let t = Tensor::new([2], vec![0.3, 5.0]).unwrap();
        let q = Precision::default_fixed(4).unwrap().quantize_tensor(&t);
        assert_eq!(q.data(), &[0.25, 1.75]);

        let t = Tensor::new([2], vec![0.123456, -9.87]).unwrap();
        assert_eq!(Precision::Float32.quantize_tensor(&t), t);
    }

    #[test]
    fn ste_gating() {
        let g = Tensor::new([3], vec![1.0, 1.0, 1.0]).unwrap();
        let pre = Tensor::new([3], vec![0.5, -0.3, 0.9]).unwrap();
        let out = Precision::Binary.ste_backward(&g, &pre).unwrap();
        assert_eq!(out.data(), &[1.0, 1.0, 1.0]);

        let g = Tensor::new([2], vec![1.0, 1.0]).unwrap();
        let pre = Tensor::new([2], vec![2.0, -1.5]).unwrap();
        let out = Precision::Binary.ste_backward(&g, &pre).unwrap();
        assert_eq!(out.data(), &[0.0, 0.0]);

        let g = Tensor::new([2], vec![0.7, -0.1]).unwrap();
        let pre = Tensor::new([2], vec![100.0, -50.0]).unwrap();
        let out = Precision::Float32.ste_backward(&g, &pre).unwrap();
        assert_eq!(out, g);

        let bad = Tensor::new([3], vec![0.0; 3]).unwrap();
        assert!(Precision::Binary.ste_backward(&g, &bad).is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in STANDARD_PRECISIONS {
            let p: Precision = name.parse().unwrap();
            assert_eq!(p.to_string(), name);
        }
        let p: Precision = "fixed6.3".parse().unwrap();
        assert_eq!(p, Precision::Fixed(FixedPointFormat::new(6, 3).unwrap()));
        assert_eq!(p.to_string(), "fixed6.3");
        assert!("int3".parse::<Precision>().is_err());
        assert!("bf16".parse::<Precision>().is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn any_fixed() -> impl Strategy<Value = FixedPointFormat> {
            (1u32..=24).prop_flat_map(|wl| {
                (Just(wl), 0..wl).prop_map(|(wl, fl)| FixedPointFormat::new(wl, fl).unwrap())
            })
        }

        proptest! {
            #[test]
            fn fixed_output_in_range_idempotent_monotone(
                fmt in any_fixed(),
                x in -1e6f64..1e6,
                y in -1e6f64..1e6,
            ) {
                let (lo, hi) = fmt.range();
                let qx = fmt.quantize(x);
                prop_assert!(qx >= lo && qx <= hi);
                // On-lattice check: qx is an integer multiple of the step.
                let units = qx / fmt.step();
                prop_assert_eq!(units, units.round());
                // Idempotence.
                prop_assert_eq!(fmt.quantize(qx), qx);
                // Monotonicity.
                let (a, b) = if x <= y { (x, y) } else { (y, x) };
                prop_assert!(fmt.quantize(a) <= fmt.quantize(b));
                // Error bound within the representable range.
                if x >= lo && x <= hi {
                    prop_assert!((qx - x).abs() <= fmt.step() / 2.0 + 1e-12);
                }
            }

            #[test]
            fn binary_is_sign_with_positive_zero(x in -1e6f64..1e6) {
                let q = quantize_binary(x);
                prop_assert!(q == 1.0 || q == -1.0);
                if x >= 0.0 {
                    prop_assert_eq!(q, 1.0);
                } else {
                    prop_assert_eq!(q, -1.0);
                }
            }
        }
    }
}
