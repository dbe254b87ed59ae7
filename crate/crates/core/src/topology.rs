//! Declarative network descriptions, the reference architectures at
//! configurable width scales, and exact parameter / operation counting.
//!
//! A [`TopologySpec`] is a device- and precision-independent layer list.
//! Width scaling multiplies hidden units (FC) or channel counts (conv) by a
//! factor `s`, rounding to the nearest integer and never below 1; depth is
//! never scaled. Counting rules: parameters are weight elements only (no
//! biases, no batch-norm parameters), and one fundamental operation is one
//! MAC (or XNOR + popcount step).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supported activation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Activation {
    #[serde(rename = "hardtanh")]
    HardTanh,
    #[serde(rename = "relu")]
    Relu,
    #[default]
    #[serde(rename = "none")]
    None,
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Activation::HardTanh => "hardtanh",
            Activation::Relu => "relu",
            Activation::None => "none",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Activation> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hardtanh" => Ok(Activation::HardTanh),
            "relu" => Ok(Activation::Relu),
            "none" => Ok(Activation::None),
            other => Err(Error::arg(format!("unknown activation '{other}'"))),
        }
    }
}

/// One layer of a feed-forward network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    FullyConnected {
        in_features: usize,
        out_features: usize,
        #[serde(default)]
        has_batchnorm: bool,
        #[serde(default)]
        activation: Activation,
    },
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        /// Square kernel side length.
        kernel: usize,
        stride: usize,
        padding: usize,
        in_height: usize,
        in_width: usize,
        #[serde(default)]
        has_batchnorm: bool,
        #[serde(default)]
        activation: Activation,
    },
    MaxPool2d { window: usize, stride: usize },
}

impl LayerSpec {
    /// Hidden FC layer with batch norm and an activation.
    pub fn fc(in_features: usize, out_features: usize, activation: Activation) -> LayerSpec {
        LayerSpec::FullyConnected {
            in_features,
            out_features,
            has_batchnorm: true,
            activation,
        }
    }

    /// Output FC layer: no batch norm, no activation (feeds the loss).
    pub fn fc_output(in_features: usize, out_features: usize) -> LayerSpec {
        LayerSpec::FullyConnected {
            in_features,
            out_features,
            has_batchnorm: false,
            activation: Activation::None,
        }
    }

    /// Weight elements of this layer (biases and batch-norm excluded).
    pub fn params(&self) -> u64 {
        match *self {
            LayerSpec::FullyConnected {
                in_features,
                out_features,
                ..
            } => in_features as u64 * out_features as u64,
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => kernel as u64 * kernel as u64 * in_channels as u64 * out_channels as u64,
            LayerSpec::MaxPool2d { .. } => 0,
        }
    }

    /// Fundamental operations (MACs) per input frame.
    pub fn ops(&self) -> Result<u64> {
        match *self {
            LayerSpec::FullyConnected { .. } => Ok(self.params()),
            LayerSpec::Conv2d {
                kernel,
                stride,
                padding,
                in_height,
                in_width,
                ..
            } => {
                let out_h = conv_out_dim(in_height, kernel, stride, padding)?;
                let out_w = conv_out_dim(in_width, kernel, stride, padding)?;
                Ok(out_h as u64 * out_w as u64 * self.params())
            }
            LayerSpec::MaxPool2d { .. } => Ok(0),
        }
    }

    fn activation_mut(&mut self) -> Option<&mut Activation> {
        match self {
            LayerSpec::FullyConnected { activation, .. }
            | LayerSpec::Conv2d { activation, .. } => Some(activation),
            LayerSpec::MaxPool2d { .. } => None,
        }
    }
}

/// Output spatial side of a convolution: floor((in + 2·pad - k) / stride) + 1.
pub fn conv_out_dim(in_dim: usize, kernel: usize, stride: usize, padding: usize) -> Result<usize> {
    if stride == 0 {
        return Err(Error::arg("conv stride must be >= 1"));
    }
    if kernel == 0 {
        return Err(Error::arg("conv kernel must be >= 1"));
    }
    let padded = in_dim + 2 * padding;
    if padded < kernel {
        return Err(Error::shape(format!(
            "conv kernel {kernel} exceeds padded input {padded}"
        )));
    }
    Ok((padded - kernel) / stride + 1)
}

/// Output spatial side of a pooling window: floor((in - window) / stride) + 1.
pub fn pool_out_dim(in_dim: usize, window: usize, stride: usize) -> Result<usize> {
    if stride == 0 {
        return Err(Error::arg("pool stride must be >= 1"));
    }
    if window == 0 || window > in_dim {
        return Err(Error::shape(format!(
            "pool window {window} invalid for input {in_dim}"
        )));
    }
    Ok((in_dim - window) / stride + 1)
}

/// Feature shape flowing between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureShape {
    Flat(usize),
    Spatial {
        channels: usize,
        height: usize,
        width: usize,
    },
}

impl FeatureShape {
    pub fn features(&self) -> usize {
        match *self {
            FeatureShape::Flat(n) => n,
            FeatureShape::Spatial {
                channels,
                height,
                width,
            } => channels * height * width,
        }
    }

    fn from_dims(dims: &[usize]) -> Result<FeatureShape> {
        match dims {
            [n] => Ok(FeatureShape::Flat(*n)),
            [c, h, w] => Ok(FeatureShape::Spatial {
                channels: *c,
                height: *h,
                width: *w,
            }),
            other => Err(Error::shape(format!(
                "input_shape must have 1 or 3 dims, got {other:?}"
            ))),
        }
    }
}

/// A named, ordered network description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub name: String,
    /// `[features]` for flat inputs or `[channels, height, width]` for images.
    pub input_shape: Vec<usize>,
    pub num_classes: usize,
    pub layers: Vec<LayerSpec>,
}

/// Width scales studied by default.
pub const STANDARD_SCALES: [f64; 6] = [0.03125, 0.0625, 0.125, 0.25, 0.5, 1.0];

/// Format version written into serialized topology files.
pub const TOPOLOGY_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TopologyFile {
    version: u32,
    topology: TopologySpec,
}

impl TopologySpec {
    /// Total weight elements.
    pub fn count_params(&self) -> u64 {
        self.layers.iter().map(LayerSpec::params).sum()
    }

    /// Fundamental operations (MACs) per input frame.
    pub fn count_ops(&self) -> u64 {
        self.layers
            .iter()
            .map(|l| l.ops().unwrap_or(0))
            .sum()
    }

    /// Operation count with a multiply and an add tallied separately
    /// (`ops_per_mac = 2`) or fused (`ops_per_mac = 1`, the default
    /// convention everywhere else in this crate).
    pub fn count_ops_with(&self, ops_per_mac: u32) -> Result<u64> {
        match ops_per_mac {
            1 | 2 => Ok(self.count_ops() * ops_per_mac as u64),
            other => Err(Error::arg(format!("ops_per_mac must be 1 or 2, got {other}"))),
        }
    }

    /// Walk the layer chain, checking that feature dimensions connect and
    /// that the final layer produces `num_classes` features.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::shape(format!("topology '{}' has no layers", self.name)));
        }
        let mut shape = FeatureShape::from_dims(&self.input_shape)?;
        for (idx, layer) in self.layers.iter().enumerate() {
            shape = step_shape(shape, layer).map_err(|e| {
                Error::shape(format!("layer {idx} of '{}': {e}", self.name))
            })?;
        }
        let out = shape.features();
        if out != self.num_classes {
            return Err(Error::shape(format!(
                "topology '{}' ends with {out} features, expected num_classes = {}",
                self.name, self.num_classes
            )));
        }
        Ok(())
    }

    /// Feature shape after each layer (useful for building runtime state).
    pub fn shape_trace(&self) -> Result<Vec<FeatureShape>> {
        let mut shape = FeatureShape::from_dims(&self.input_shape)?;
        let mut trace = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            shape = step_shape(shape, layer)?;
            trace.push(shape);
        }
        Ok(trace)
    }

    /// Copy with every non-`None` activation replaced by `act`.
    pub fn with_activation(&self, act: Activation) -> TopologySpec {
        let mut out = self.clone();
        for layer in &mut out.layers {
            if let Some(a) = layer.activation_mut() {
                if *a != Activation::None {
                    *a = act;
                }
            }
        }
        out
    }

    /// Serialize to a versioned TOML document.
    pub fn to_toml(&self) -> Result<String> {
        let file = TopologyFile {
            version: TOPOLOGY_FORMAT_VERSION,
            topology: self.clone(),
        };
        toml::to_string_pretty(&file).map_err(|e| Error::data(format!("topology encode: {e}")))
    }

    /// Parse a versioned TOML document produced by [`TopologySpec::to_toml`].
    pub fn from_toml(text: &str) -> Result<TopologySpec> {
        let file: TopologyFile =
            toml::from_str(text).map_err(|e| Error::data(format!("topology parse: {e}")))?;
        if file.version > TOPOLOGY_FORMAT_VERSION || file.version == 0 {
            return Err(Error::VersionMismatch {
                found: file.version,
                supported: TOPOLOGY_FORMAT_VERSION,
            });
        }
        Ok(file.topology)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TopologySpec> {
        let text = std::fs::read_to_string(path)?;
        TopologySpec::from_toml(&text)
    }
}

fn step_shape(shape: FeatureShape, layer: &LayerSpec) -> Result<FeatureShape> {
    match *layer {
        LayerSpec::FullyConnected {
            in_features,
            out_features,
            ..
        } => {
            let have = shape.features();
            if have != in_features {
                return Err(Error::shape(format!(
                    "fc expects {in_features} inputs, got {have}"
                )));
            }
            Ok(FeatureShape::Flat(out_features))
        }
        LayerSpec::Conv2d {
            in_channels,
            out_channels,
            kernel,
            stride,
            padding,
            in_height,
            in_width,
            ..
        } => match shape {
            FeatureShape::Spatial {
                channels,
                height,
                width,
            } => {
                if channels != in_channels || height != in_height || width != in_width {
                    return Err(Error::shape(format!(
                        "conv expects {in_channels}x{in_height}x{in_width}, got {channels}x{height}x{width}"
                    )));
                }
                Ok(FeatureShape::Spatial {
                    channels: out_channels,
                    height: conv_out_dim(height, kernel, stride, padding)?,
                    width: conv_out_dim(width, kernel, stride, padding)?,
                })
            }
            FeatureShape::Flat(n) => Err(Error::shape(format!(
                "conv needs a spatial input, got {n} flat features"
            ))),
        },
        LayerSpec::MaxPool2d { window, stride } => match shape {
            FeatureShape::Spatial {
                channels,
                height,
                width,
            } => Ok(FeatureShape::Spatial {
                channels,
                height: pool_out_dim(height, window, stride)?,
                width: pool_out_dim(width, window, stride)?,
            }),
            FeatureShape::Flat(n) => Err(Error::shape(format!(
                "maxpool needs a spatial input, got {n} flat features"
            ))),
        },
    }
}

/// Nearest integer width >= 1 after scaling.
fn scaled_width(base: usize, scale: f64) -> usize {
    ((base as f64 * scale).round() as usize).max(1)
}

fn check_scale(scale: f64) -> Result<()> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::arg(format!("scale must be a positive number, got {scale}")));
    }
    Ok(())
}

fn is_standard_scale(scale: f64) -> bool {
    STANDARD_SCALES.iter().any(|s| (s - scale).abs() < 1e-12)
}

/// The fully-connected reference network: 784 inputs, three hidden layers of
/// `4096 * scale` neurons (batch norm + activation each), and a 10-way
/// output layer.
pub fn reference_fc(scale: f64) -> Result<TopologySpec> {
    check_scale(scale)?;
    if !is_standard_scale(scale) {
        log::warn!("fc scale {scale} is outside the standard set {STANDARD_SCALES:?}");
    }
    let hidden = scaled_width(4096, scale);
    let layers = vec![
        LayerSpec::fc(784, hidden, Activation::HardTanh),
        LayerSpec::fc(hidden, hidden, Activation::HardTanh),
        LayerSpec::fc(hidden, hidden, Activation::HardTanh),
        LayerSpec::fc_output(hidden, 10),
    ];
    let topo = TopologySpec {
        name: "fc".to_string(),
        input_shape: vec![784],
        num_classes: 10,
        layers,
    };
    topo.validate()?;
    Ok(topo)
}

/// The VGG-16-inspired reference for 32x32 RGB inputs: three blocks of
/// (3x3 conv, 3x3 conv, 2x2 maxpool) with `scale * {128, 256, 512}`
/// channels, two 1024-neuron FC layers, and a 10-way classifier. The FC
/// widths are not scaled; only channel counts are.
pub fn reference_vgg(scale: f64) -> Result<TopologySpec> {
    check_scale(scale)?;
    let chans = [
        scaled_width(128, scale),
        scaled_width(256, scale),
        scaled_width(512, scale),
    ];
    let mut layers = Vec::new();
    let mut in_ch = 3;
    let mut side = 32;
    for c in chans {
        for _ in 0..2 {
            layers.push(LayerSpec::Conv2d {
                in_channels: in_ch,
                out_channels: c,
                kernel: 3,
                stride: 1,
                padding: 1,
                in_height: side,
                in_width: side,
                has_batchnorm: true,
                activation: Activation::HardTanh,
            });
            in_ch = c;
        }
        layers.push(LayerSpec::MaxPool2d { window: 2, stride: 2 });
        side /= 2;
    }
    let flat = in_ch * side * side;
    layers.push(LayerSpec::fc(flat, 1024, Activation::HardTanh));
    layers.push(LayerSpec::fc(1024, 1024, Activation::HardTanh));
    layers.push(LayerSpec::fc_output(1024, 10));
    let topo = TopologySpec {
        name: "vgg".to_string(),
        input_shape: vec![3, 32, 32],
        num_classes: 10,
        layers,
    };
    topo.validate()?;
    Ok(topo)
}

/// The standard AlexNet shape (5 conv + 3 FC, 227x227 RGB input, 1000
/// classes) with conv channel counts scaled by `scale`; FC widths stay at
/// 4096. Used for estimation only.
pub fn reference_alexnet(scale: f64) -> Result<TopologySpec> {
    check_scale(scale)?;
    let c = [
        scaled_width(96, scale),
        scaled_width(256, scale),
        scaled_width(384, scale),
        scaled_width(384, scale),
        scaled_width(256, scale),
    ];
    let conv = |in_ch: usize, out_ch: usize, k: usize, s: usize, p: usize, side: usize| {
        LayerSpec::Conv2d {
            in_channels: in_ch,
            out_channels: out_ch,
            kernel: k,
            stride: s,
            padding: p,
            in_height: side,
            in_width: side,
            has_batchnorm: true,
            activation: Activation::HardTanh,
        }
    };
    let layers = vec![
        conv(3, c[0], 11, 4, 0, 227),
        LayerSpec::MaxPool2d { window: 3, stride: 2 },
        conv(c[0], c[1], 5, 1, 2, 27),
        LayerSpec::MaxPool2d { window: 3, stride: 2 },
        conv(c[1], c[2], 3, 1, 1, 13),
        conv(c[2], c[3], 3, 1, 1, 13),
        conv(c[3], c[4], 3, 1, 1, 13),
        LayerSpec::MaxPool2d { window: 3, stride: 2 },
        LayerSpec::fc(c[4] * 6 * 6, 4096, Activation::HardTanh),
        LayerSpec::fc(4096, 4096, Activation::HardTanh),
        LayerSpec::fc_output(4096, 1000),
    ];
    let topo = TopologySpec {
        name: "alexnet".to_string(),
        input_shape: vec![3, 227, 227],
        num_classes: 1000,
        layers,
    };
    topo.validate()?;
    Ok(topo)
}

/// Look up a reference family by name ("fc", "vgg", or "alexnet").
pub fn reference_by_name(name: &str, scale: f64) -> Result<TopologySpec> {
    match name.trim().to_ascii_lowercase().as_str() {
        "fc" => reference_fc(scale),
        "vgg" => reference_vgg(scale),
        "alexnet" => reference_alexnet(scale),
        other => Err(Error::arg(format!(
            "unknown topology '{other}' (expected fc, vgg, or alexnet)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hidden_widths(t: &TopologySpec) -> Vec<usize> {
        t.layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::FullyConnected {
                    out_features,
                    has_batchnorm: true,
                    ..
                } => Some(*out_features),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn fc_reference_widths_and_counts() {
        let full = reference_fc(1.0).unwrap();
        assert_eq!(hidden_widths(&full), vec![4096, 4096, 4096]);
        assert_eq!(full.count_params(), 36_806_656);
        assert_eq!(full.count_ops(), full.count_params());

        let eighth = reference_fc(0.125).unwrap();
        assert_eq!(hidden_widths(&eighth), vec![512, 512, 512]);
        assert_eq!(eighth.count_params(), 930_816);

        let small = reference_fc(0.03125).unwrap();
        assert_eq!(hidden_widths(&small), vec![128, 128, 128]);
    }

    #[test]
    fn fc_scale_must_be_positive() {
        assert!(reference_fc(0.0).is_err());
        assert!(reference_fc(-0.5).is_err());
        assert!(reference_fc(f64::NAN).is_err());
    }

    #[test]
    fn params_monotone_in_scale() {
        let mut prev = 0;
        for s in STANDARD_SCALES {
            let n = reference_fc(s).unwrap().count_params();
            assert!(n > prev, "params must grow with scale (s = {s})");
            prev = n;
        }
    }

    #[test]
    fn vgg_channels_and_structure() {
        let full = reference_vgg(1.0).unwrap();
        let chans: Vec<usize> = full
            .layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::Conv2d { out_channels, .. } => Some(*out_channels),
                _ => None,
            })
            .collect();
        assert_eq!(chans, vec![128, 128, 256, 256, 512, 512]);
        assert_eq!(hidden_widths(&full), vec![1024, 1024]);

        let half = reference_vgg(0.5).unwrap();
        let chans: Vec<usize> = half
            .layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::Conv2d { out_channels, .. } => Some(*out_channels),
                _ => None,
            })
            .collect();
        assert_eq!(chans, vec![64, 64, 128, 128, 256, 256]);
    }

    #[test]
    fn conv_ops_example() {
        let layer = LayerSpec::Conv2d {
            in_channels: 8,
            out_channels: 16,
            kernel: 3,
            stride: 1,
            padding: 1,
            in_height: 32,
            in_width: 32,
            has_batchnorm: false,
            activation: Activation::None,
        };
        assert_eq!(layer.ops().unwrap(), 1_179_648);
    }

    #[test]
    fn pool_only_counts_zero() {
        let t = TopologySpec {
            name: "pool-only".to_string(),
            input_shape: vec![1, 4, 4],
            num_classes: 4,
            layers: vec![LayerSpec::MaxPool2d { window: 2, stride: 2 }],
        };
        assert_eq!(t.count_ops(), 0);
        assert_eq!(t.count_params(), 0);
    }

    #[test]
    fn references_chain_consistently() {
        for s in [0.03125, 0.125, 1.0] {
            reference_fc(s).unwrap().validate().unwrap();
            reference_vgg(s).unwrap().validate().unwrap();
            reference_alexnet(s).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn alexnet_spatial_chain_and_params() {
        let t = reference_alexnet(1.0).unwrap();
        let trace = t.shape_trace().unwrap();
        let spatial: Vec<(usize, usize)> = trace
            .iter()
            .filter_map(|s| match s {
                FeatureShape::Spatial { channels, height, .. } => Some((*channels, *height)),
                FeatureShape::Flat(_) => None,
            })
            .collect();
        assert_eq!(
            spatial,
            vec![
                (96, 55),
                (96, 27),
                (256, 27),
                (256, 13),
                (384, 13),
                (384, 13),
                (256, 13),
                (256, 6),
            ]
        );
        assert_eq!(t.count_params(), 62_367_776);
    }

    #[test]
    fn validate_rejects_broken_chains() {
        let t = TopologySpec {
            name: "broken".to_string(),
            input_shape: vec![8],
            num_classes: 2,
            layers: vec![LayerSpec::fc_output(9, 2)],
        };
        assert!(matches!(t.validate(), Err(Error::Shape(_))));

        let t = TopologySpec {
            name: "wrong-out".to_string(),
            input_shape: vec![8],
            num_classes: 3,
            layers: vec![LayerSpec::fc_output(8, 2)],
        };
        assert!(t.validate().is_err());
    }

    #[test]
    fn ops_per_mac_flag() {
        let t = reference_fc(0.03125).unwrap();
        assert_eq!(t.count_ops_with(1).unwrap(), t.count_ops());
        assert_eq!(t.count_ops_with(2).unwrap(), 2 * t.count_ops());
        assert!(t.count_ops_with(3).is_err());
    }

    #[test]
    fn activation_override() {
        let t = reference_fc(0.03125).unwrap().with_activation(Activation::Relu);
        let mut hidden_acts = 0;
        for l in &t.layers {
            if let LayerSpec::FullyConnected { activation, has_batchnorm, .. } = l {
                if *has_batchnorm {
                    assert_eq!(*activation, Activation::Relu);
                    hidden_acts += 1;
                } else {
                    assert_eq!(*activation, Activation::None, "output layer stays bare");
                }
            }
        }
        assert_eq!(hidden_acts, 3);
    }

    #[test]
    fn toml_round_trip_and_versioning() {
        let t = reference_vgg(0.25).unwrap();
        let text = t.to_toml().unwrap();
        let back = TopologySpec::from_toml(&text).unwrap();
        assert_eq!(back, t);

        let future = text.replacen("version = 1", "version = 99", 1);
        assert!(matches!(
            TopologySpec::from_toml(&future),
            Err(Error::VersionMismatch { found: 99, supported: 1 })
        ));
    }

    #[test]
    fn reference_lookup() {
        assert_eq!(reference_by_name("fc", 1.0).unwrap().name, "fc");
        assert_eq!(reference_by_name("VGG", 0.5).unwrap().name, "vgg");
        assert!(reference_by_name("resnet", 1.0).is_err());
    }

    #[test]
    fn activation_names() {
        for name in ["hardtanh", "relu", "none"] {
            let a: Activation = name.parse().unwrap();
            assert_eq!(a.to_string(), name);
        }
        assert!("sigmoid".parse::<Activation>().is_err());
    }
}
