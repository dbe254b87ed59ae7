//! `qdse train`: one quantization-aware training run → checkpoint,
//! per-epoch metrics CSV, and a rerunnable manifest.

use std::path::PathBuf;

use clap::Args;
use qdse_core::topology::{reference_by_name, Activation, LayerSpec};
use qdse_core::trainer::{fit, save_checkpoint, BnOrder, TrainConfig};
use qdse_core::{Error, Result};
use serde::Serialize;

use crate::cmd::Ctx;
use crate::config::{pick, pick_opt};
use crate::data::DataSpec;
use crate::manifest::write_manifest;

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Weight/activation precision: binary, int2, int4, int8, int16, fp32,
    /// or fixed<WL>.<FL>.
    #[arg(long)]
    precision: Option<String>,
    /// Width scale of the reference topology.
    #[arg(long)]
    scale: Option<f64>,
    /// Reference topology family (training supports fc).
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Hidden-layer activation: hardtanh or relu (default per precision).
    #[arg(long)]
    act: Option<String>,
    /// Batch-norm order: bn_then_act or act_then_bn (default per precision).
    #[arg(long)]
    bn_order: Option<String>,
    /// Initial learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Per-epoch learning-rate decay factor.
    #[arg(long)]
    lr_decay: Option<f64>,
    /// Directory holding the four MNIST IDX files.
    #[arg(long, value_name = "DIR")]
    data_dir: Option<PathBuf>,
    /// Train on a seeded synthetic 10-class set of N examples instead.
    #[arg(long, value_name = "N")]
    synthetic: Option<usize>,
    /// Cap the number of training examples.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Serialize)]
struct ResolvedTrain {
    precision: String,
    scale: f64,
    topology: String,
    epochs: usize,
    batch_size: usize,
    act: String,
    bn_order: String,
    lr: f64,
    lr_decay: f64,
    seed: u64,
    out_dir: String,
    #[serde(flatten)]
    data: DataSpec,
}

pub fn run(args: TrainArgs, ctx: &Ctx) -> Result<()> {
    let precision = pick_opt(args.precision, ctx.file.precision.clone())
        .ok_or_else(|| Error::InvalidArgument("--precision is required".into()))?
        .parse()?;
    let scale = pick(args.scale, ctx.file.scale, 0.125);
    let family = pick(args.topology, ctx.file.topology.clone(), "fc".into());

    let mut config = TrainConfig::for_precision(precision).with_seed(ctx.seed);
    if let Some(epochs) = pick_opt(args.epochs, ctx.file.epochs) {
        config.epochs = epochs;
    }
    if let Some(batch) = pick_opt(args.batch_size, ctx.file.batch_size) {
        config.batch_size = batch;
    }
    if let Some(act) = pick_opt(args.act, ctx.file.act.clone()) {
        config.activation_fn = act.parse::<Activation>()?;
    }
    if let Some(order) = pick_opt(args.bn_order, ctx.file.bn_order.clone()) {
        config.bn_order = order.parse::<BnOrder>()?;
    }
    if let Some(lr) = pick_opt(args.lr, ctx.file.lr) {
        config.learning_rate = lr;
    }
    if let Some(decay) = pick_opt(args.lr_decay, ctx.file.lr_decay) {
        config.lr_decay = decay;
    }
    let data = DataSpec::resolve(
        args.data_dir.or_else(|| ctx.file.data_dir.clone()),
        args.synthetic.or(ctx.file.synthetic),
        args.limit.or(ctx.file.limit),
    );

    // Everything checkable is checked before any compute or data loading.
    config.validate()?;
    let topology = reference_by_name(&family, scale)?;
    if !topology
        .layers
        .iter()
        .all(|l| matches!(l, LayerSpec::FullyConnected { .. }))
    {
        return Err(Error::InvalidArgument(format!(
            "training supports the fully connected family; '{family}' contains conv/pool layers"
        )));
    }
    data.check()?;

    let resolved = ResolvedTrain {
        precision: precision.to_string(),
        scale,
        topology: family,
        epochs: config.epochs,
        batch_size: config.batch_size,
        act: config.activation_fn.to_string(),
        bn_order: config.bn_order.to_string(),
        lr: config.learning_rate,
        lr_decay: config.lr_decay,
        seed: ctx.seed,
        out_dir: ctx.out_dir.display().to_string(),
        data: data.clone(),
    };

    let (train_set, test_set) = data.load(ctx.seed)?;
    log::info!(
        "training {} {}(scale {scale}) on {} examples",
        resolved.precision,
        resolved.topology,
        train_set.len()
    );
    let (model, metrics) = fit(&config, &topology, &train_set, &test_set)?;

    let ckpt_path = ctx.out_dir.join("model.ckpt");
    save_checkpoint(&model, &ckpt_path)?;
    let metrics_path = ctx.out_dir.join("metrics.csv");
    write_metrics(&metrics_path, &metrics)?;
    let manifest = write_manifest(
        &ctx.out_dir,
        "train",
        &resolved,
        &data.input_paths(),
        &[ckpt_path.clone(), metrics_path.clone()],
    )?;

    let last = metrics.last().expect("at least one epoch");
    println!(
        "trained {} {}(scale {}) for {} epochs: test error {:.4}",
        resolved.precision, resolved.topology, scale, config.epochs, last.valid_error
    );
    println!("checkpoint: {}", ckpt_path.display());
    println!("metrics:    {}", metrics_path.display());
    println!("manifest:   {}", manifest.display());
    Ok(())
}

fn write_metrics(path: &std::path::Path, metrics: &[qdse_core::trainer::EpochMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::DataFormat(format!("metrics csv: {e}")))?;
    w.write_record(["epoch", "learning_rate", "train_loss", "valid_error"])
        .map_err(|e| Error::DataFormat(format!("metrics csv: {e}")))?;
    for m in metrics {
        w.write_record([
            m.epoch.to_string(),
            m.learning_rate.to_string(),
            m.train_loss.to_string(),
            m.valid_error.to_string(),
        ])
        .map_err(|e| Error::DataFormat(format!("metrics csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}
