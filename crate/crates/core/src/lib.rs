//! Core library for quantized network training and hardware-aware design
//! space exploration.
//!
//! The crate is organized in layers:
//!
//! - [`tensor`], [`rng`], [`error`] — dense f64 tensors, deterministic
//!   random numbers, and the shared error type;
//! - [`quantize`] — numeric representations (binary, fixed point, float)
//!   and their quantizers with straight-through gradients;
//! - [`topology`] — device-independent network descriptions and the
//!   reference architectures at configurable width scales;
//! - [`nn`] — layer forward/backward kernels;
//! - [`trainer`] — quantization-aware training with full-precision master
//!   weights, plus checkpointing and evaluation;
//! - [`dataio`] — IDX/CIFAR dataset loading and synthetic data;
//! - [`hwmodel`] — FPGA cost, throughput, memory, and roofline estimates;
//! - [`explorer`] — precision x scale grid sweeps, Pareto frontier
//!   extraction, and CSV/JSON export.

pub mod dataio;
pub mod error;
pub mod explorer;
pub mod hwmodel;
pub mod nn;
pub mod quantize;
pub mod rng;
pub mod tensor;
pub mod topology;
pub mod trainer;

pub use error::{Error, Result};
pub use tensor::Tensor;
