//! `qdse eval`: score a saved checkpoint on a held-out set.

use std::path::PathBuf;

use clap::Args;
use qdse_core::trainer::{evaluate, load_checkpoint};
use qdse_core::{Error, Result};
use serde::Serialize;

use crate::cmd::Ctx;
use crate::config::pick_opt;
use crate::data::DataSpec;
use crate::manifest::write_manifest;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint produced by `qdse train`.
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,
    /// Directory holding the four MNIST IDX files.
    #[arg(long, value_name = "DIR")]
    data_dir: Option<PathBuf>,
    /// Evaluate on a seeded synthetic 10-class set instead.
    #[arg(long, value_name = "N")]
    synthetic: Option<usize>,
    /// Cap the number of evaluation examples.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Serialize)]
struct ResolvedEval {
    checkpoint: String,
    seed: u64,
    out_dir: String,
    #[serde(flatten)]
    data: DataSpec,
}

pub fn run(args: EvalArgs, ctx: &Ctx) -> Result<()> {
    let checkpoint = pick_opt(args.checkpoint, ctx.file.checkpoint.clone())
        .ok_or_else(|| Error::InvalidArgument("--checkpoint is required".into()))?;
    let data = DataSpec::resolve(
        args.data_dir.or_else(|| ctx.file.data_dir.clone()),
        args.synthetic.or(ctx.file.synthetic),
        args.limit.or(ctx.file.limit),
    );
    if !checkpoint.is_file() {
        return Err(Error::InvalidArgument(format!(
            "checkpoint not found: {}",
            checkpoint.display()
        )));
    }
    data.check()?;

    let resolved = ResolvedEval {
        checkpoint: checkpoint.display().to_string(),
        seed: ctx.seed,
        out_dir: ctx.out_dir.display().to_string(),
        data: data.clone(),
    };

    let model = load_checkpoint(&checkpoint)?;
    let (_, test_set) = data.load(ctx.seed)?;
    let test_error = evaluate(&model, &test_set)?;

    let report_path = ctx.out_dir.join("eval.toml");
    let mut report = toml::Table::new();
    report.insert("checkpoint".into(), resolved.checkpoint.clone().into());
    report.insert("examples".into(), (test_set.len() as i64).into());
    report.insert("test_error".into(), test_error.into());
    std::fs::write(&report_path, toml::to_string_pretty(&report).expect("toml table"))?;

    let mut inputs = data.input_paths();
    inputs.insert(0, checkpoint.clone());
    let manifest = write_manifest(&ctx.out_dir, "eval", &resolved, &inputs, &[report_path.clone()])?;

    println!(
        "eval {}: test error {:.4} over {} examples",
        checkpoint.display(),
        test_error,
        test_set.len()
    );
    println!("report:   {}", report_path.display());
    println!("manifest: {}", manifest.display());
    Ok(())
}
