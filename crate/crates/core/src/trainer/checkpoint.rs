//! Versioned binary checkpoint container.
//!
//! Layout: magic `"QDSE"`, little-endian u32 format version, u64-length-
//! prefixed JSON header (config, topology, step counter), then tensor
//! payloads in a fixed documented order — per layer: weights, Adam m, Adam
//! v; then, if the layer has batch norm: gamma, beta, running mean, running
//! var, gamma moments (m, v), beta moments (m, v). Each tensor is stored as
//! a u8 rank, u64 dimensions, and raw little-endian f64 values, so round
//! trips are bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::topology::TopologySpec;
use crate::trainer::config::TrainConfig;
use crate::trainer::model::{LayerState, ModelState, Moments};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"QDSE";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    config: TrainConfig,
    topology: TopologySpec,
    step: u64,
}

fn write_tensor(w: &mut impl Write, t: &Tensor) -> Result<()> {
    w.write_u8(t.ndim() as u8)?;
    for &d in t.shape() {
        w.write_u64::<LittleEndian>(d as u64)?;
    }
    for &v in t.data() {
        w.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

fn read_tensor(r: &mut impl Read) -> Result<Tensor> {
    let truncated = |_| Error::data("checkpoint truncated");
    let ndim = r.read_u8().map_err(truncated)? as usize;
    let mut shape = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        shape.push(r.read_u64::<LittleEndian>().map_err(truncated)? as usize);
    }
    let len: usize = shape.iter().product();
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        data.push(r.read_f64::<LittleEndian>().map_err(truncated)?);
    }
    Tensor::new(shape, data)
}

/// Serialize a model (with its config) to `path`.
pub fn save_checkpoint(model: &ModelState, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_u32::<LittleEndian>(CHECKPOINT_VERSION)?;
    let header = serde_json::to_vec(&CheckpointHeader {
        config: model.config.clone(),
        topology: model.topology.clone(),
        step: model.step,
    })
    .map_err(|e| Error::data(format!("checkpoint header encode: {e}")))?;
    w.write_u64::<LittleEndian>(header.len() as u64)?;
    w.write_all(&header)?;
    for layer in &model.layers {
        write_tensor(&mut w, &layer.weights)?;
        write_tensor(&mut w, &layer.w_moments.m)?;
        write_tensor(&mut w, &layer.w_moments.v)?;
        if let Some(bn) = &layer.bn {
            write_tensor(&mut w, &bn.gamma)?;
            write_tensor(&mut w, &bn.beta)?;
            write_tensor(&mut w, &bn.running_mean)?;
            write_tensor(&mut w, &bn.running_var)?;
            let gm = layer.gamma_moments.as_ref().ok_or_else(|| {
                Error::Compute("layer has batch norm but no gamma moments".into())
            })?;
            write_tensor(&mut w, &gm.m)?;
            write_tensor(&mut w, &gm.v)?;
            let bm = layer.beta_moments.as_ref().ok_or_else(|| {
                Error::Compute("layer has batch norm but no beta moments".into())
            })?;
            write_tensor(&mut w, &bm.m)?;
            write_tensor(&mut w, &bm.v)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Load a model saved by [`save_checkpoint`].
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelState> {
    let mut r = BufReader::new(File::open(path.as_ref())?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::data("checkpoint truncated"))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::data(format!(
            "not a checkpoint file (magic {magic:?})"
        )));
    }
    let version = r
        .read_u32::<LittleEndian>()
        .map_err(|_| Error::data("checkpoint truncated"))?;
    if version == 0 || version > CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            supported: CHECKPOINT_VERSION,
        });
    }
    let header_len = r
        .read_u64::<LittleEndian>()
        .map_err(|_| Error::data("checkpoint truncated"))? as usize;
    let mut header_bytes = vec![0u8; header_len];
    r.read_exact(&mut header_bytes)
        .map_err(|_| Error::data("checkpoint truncated"))?;
    let header: CheckpointHeader = serde_json::from_slice(&header_bytes)
        .map_err(|e| Error::data(format!("checkpoint header parse: {e}")))?;

    let mut layers = Vec::with_capacity(header.topology.layers.len());
    for spec in &header.topology.layers {
        let (has_bn, activation) = match spec {
            crate::topology::LayerSpec::FullyConnected {
                has_batchnorm,
                activation,
                ..
            } => (*has_batchnorm, *activation),
            other => {
                return Err(Error::data(format!(
                    "checkpoint topology contains untrainable layer {other:?}"
                )));
            }
        };
        let weights = read_tensor(&mut r)?;
        let w_moments = Moments {
            m: read_tensor(&mut r)?,
            v: read_tensor(&mut r)?,
        };
        let mut bn = None;
        let mut gamma_moments = None;
        let mut beta_moments = None;
        if has_bn {
            bn = Some(crate::nn::BnParams {
                gamma: read_tensor(&mut r)?,
                beta: read_tensor(&mut r)?,
                running_mean: read_tensor(&mut r)?,
                running_var: read_tensor(&mut r)?,
            });
            gamma_moments = Some(Moments {
                m: read_tensor(&mut r)?,
                v: read_tensor(&mut r)?,
            });
            beta_moments = Some(Moments {
                m: read_tensor(&mut r)?,
                v: read_tensor(&mut r)?,
            });
        }
        layers.push(LayerState {
            weights,
            bn,
            activation: if activation == crate::topology::Activation::None {
                activation
            } else {
                header.config.activation_fn
            },
            w_moments,
            gamma_moments,
            beta_moments,
        });
    }

    let model = ModelState {
        config: header.config,
        topology: header.topology,
        layers,
        step: header.step,
    };
    validate_shapes(&model)?;
    Ok(model)
}

fn validate_shapes(model: &ModelState) -> Result<()> {
    for (spec, layer) in model.topology.layers.iter().zip(&model.layers) {
        if let crate::topology::LayerSpec::FullyConnected {
            in_features,
            out_features,
            ..
        } = spec
        {
            if layer.weights.shape() != [*in_features, *out_features] {
                return Err(Error::data(format!(
                    "checkpoint weight shape {:?} does not match topology {in_features}x{out_features}",
                    layer.weights.shape()
                )));
            }
            if layer.w_moments.m.shape() != layer.weights.shape()
                || layer.w_moments.v.shape() != layer.weights.shape()
            {
                return Err(Error::data("checkpoint moment shapes do not mirror weights"));
            }
        }
    }
    Ok(())
}
