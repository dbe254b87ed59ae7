//! `qdse explore`: sweep a precision x scale grid, attach hardware
//! estimates, mark the Pareto frontier, and export CSV + JSON.

use std::path::PathBuf;

use clap::Args;
use qdse_core::explorer::{
    export, pareto_front, run_grid, DesignPoint, ExportFormat, GridSpec, ParetoFront,
    PointObjective, TrainPolicy,
};
use qdse_core::hwmodel::{CostMode, HardwareModel};
use qdse_core::quantize::{standard_precisions, Precision};
use qdse_core::topology::{reference_by_name, LayerSpec, STANDARD_SCALES};
use qdse_core::{Error, Result};
use serde::Serialize;

use crate::cmd::pareto::parse_objectives;
use crate::cmd::{split_list, Ctx};
use crate::config::{pick, pick_opt};
use crate::data::DataSpec;
use crate::manifest::write_manifest;

#[derive(Debug, Args)]
pub struct ExploreArgs {
    /// Comma-separated precisions (default: the six standard ones).
    #[arg(long, value_name = "LIST")]
    precisions: Option<String>,
    /// Comma-separated width scales (default: 1,0.5,0.25,0.125,0.0625,0.03125).
    #[arg(long, value_name = "LIST")]
    scales: Option<String>,
    /// Reference topology family: fc, vgg, or alexnet.
    #[arg(long)]
    topology: Option<String>,
    /// Override the per-precision default epoch count.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Training policy: auto (train what is trainable), always, or never.
    #[arg(long, value_name = "POLICY")]
    train_policy: Option<String>,
    /// Extra pipeline latency term added to #OP x C (clock cycles).
    #[arg(long)]
    delta: Option<f64>,
    /// Resource cost column: optimistic, average, or pessimistic.
    #[arg(long)]
    cost_mode: Option<String>,
    /// TOML device/cost-table description replacing the built-in KU115.
    #[arg(long, value_name = "FILE")]
    device_file: Option<PathBuf>,
    /// Comma-separated frontier objectives (default: test_error,throughput_fps).
    #[arg(long, value_name = "LIST")]
    objectives: Option<String>,
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
struct ResolvedExplore {
    topology: String,
    precisions: Vec<String>,
    scales: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    batch_size: Option<usize>,
    train_policy: String,
    delta: f64,
    cost_mode: String,
    objectives: Vec<String>,
    seed: u64,
    out_dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    device_file: Option<String>,
    #[serde(flatten)]
    data: DataSpec,
}

pub fn run(args: ExploreArgs, ctx: &Ctx) -> Result<()> {
    let family = pick(args.topology, ctx.file.topology.clone(), "fc".into());
    let precisions = parse_precisions(args.precisions, ctx.file.precisions.clone())?;
    let scales = parse_scales(args.scales, ctx.file.scales.clone())?;
    let policy: TrainPolicy = pick(
        args.train_policy,
        ctx.file.train_policy.clone(),
        TrainPolicy::default().to_string(),
    )
    .parse()?;
    let mode: CostMode = pick(
        args.cost_mode,
        ctx.file.cost_mode.clone(),
        CostMode::default().to_string(),
    )
    .parse()?;
    let objectives = parse_objectives(args.objectives, ctx.file.objectives.clone())?;
    let device_file = args.device_file.or_else(|| ctx.file.device_file.clone());

    let mut spec = GridSpec::new(&family);
    spec.precisions = precisions;
    spec.scales = scales;
    spec.seed = ctx.seed;
    spec.epochs = pick_opt(args.epochs, ctx.file.epochs);
    spec.batch_size = pick_opt(args.batch_size, ctx.file.batch_size);
    spec.train = policy;
    spec.delta = pick(args.delta, ctx.file.delta, 0.0);
    spec.cost_mode = mode;
    spec.validate()?;

    let hw = match &device_file {
        Some(path) => HardwareModel::load(path)?,
        None => HardwareModel::default(),
    };
    hw.validate()?;

    let data = DataSpec::resolve(
        args.data_dir.or_else(|| ctx.file.data_dir.clone()),
        args.synthetic.or(ctx.file.synthetic),
        args.limit.or(ctx.file.limit),
    );
    let needs_data = match policy {
        TrainPolicy::Never => false,
        TrainPolicy::Always => true,
        TrainPolicy::Auto => reference_by_name(&family, 1.0)?
            .layers
            .iter()
            .all(|l| matches!(l, LayerSpec::FullyConnected { .. })),
    };
    if needs_data {
        data.check()?;
    }

    let resolved = ResolvedExplore {
        topology: family.clone(),
        precisions: spec.precisions.iter().map(|p| p.to_string()).collect(),
        scales: spec.scales.clone(),
        epochs: spec.epochs,
        batch_size: spec.batch_size,
        train_policy: policy.to_string(),
        delta: spec.delta,
        cost_mode: mode.to_string(),
        objectives: objectives.iter().map(|o| o.to_string()).collect(),
        seed: ctx.seed,
        out_dir: ctx.out_dir.display().to_string(),
        device_file: device_file.as_ref().map(|p| p.display().to_string()),
        data: data.clone(),
    };

    let loaded = if needs_data { Some(data.load(ctx.seed)?) } else { None };
    let points = run_grid(&spec, &hw, loaded.as_ref().map(|(tr, te)| (tr, te)))?;
    let front = frontier_if_scored(&points, &objectives)?;

    let csv_path = ctx.out_dir.join("results.csv");
    let json_path = ctx.out_dir.join("results.json");
    export(&points, front.as_ref(), &csv_path, ExportFormat::Csv)?;
    export(&points, front.as_ref(), &json_path, ExportFormat::Json)?;

    let inputs: Vec<PathBuf> = device_file
        .iter()
        .cloned()
        .chain(if needs_data { data.input_paths() } else { Vec::new() })
        .collect();
    let manifest = write_manifest(
        &ctx.out_dir,
        "explore",
        &resolved,
        &inputs,
        &[csv_path.clone(), json_path.clone()],
    )?;

    print_summary(&points, front.as_ref());
    println!("results:  {}", csv_path.display());
    println!("results:  {}", json_path.display());
    println!("manifest: {}", manifest.display());
    Ok(())
}

/// The frontier is only meaningful once at least one point carries every
/// requested objective (estimate-only sweeps have no test error).
fn frontier_if_scored(
    points: &[DesignPoint],
    objectives: &[PointObjective],
) -> Result<Option<ParetoFront>> {
    let scored = points
        .iter()
        .any(|p| objectives.iter().all(|o| o.value(p).is_some()));
    if scored {
        Ok(Some(pareto_front(points, objectives)?))
    } else {
        Ok(None)
    }
}

/// Precisions from the comma-list flag, the config-file array, or the
/// standard six, in that order of preference.
fn parse_precisions(flag: Option<String>, file: Option<Vec<String>>) -> Result<Vec<Precision>> {
    let names = match flag {
        Some(list) => Some(split_list(&list, "--precisions")?),
        None => file,
    };
    match names {
        None => Ok(standard_precisions()),
        Some(names) => names.iter().map(|s| s.parse()).collect(),
    }
}

fn parse_scales(flag: Option<String>, file: Option<Vec<f64>>) -> Result<Vec<f64>> {
    match flag {
        Some(list) => split_list(&list, "--scales")?
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("invalid scale '{s}'")))
            })
            .collect(),
        None => Ok(file.unwrap_or_else(|| STANDARD_SCALES.to_vec())),
    }
}

fn print_summary(points: &[DesignPoint], front: Option<&ParetoFront>) {
    let trained = points.iter().filter(|p| p.test_error.is_some()).count();
    let failed = points.iter().filter(|p| p.error.is_some()).count();
    println!(
        "explored {} design points ({} trained, {} failed, {} on frontier)",
        points.len(),
        trained,
        failed,
        front.map_or(0, |f| f.len())
    );
    for (i, p) in points.iter().enumerate() {
        let err = p
            .test_error
            .map(|e| format!("{e:.4}"))
            .unwrap_or_else(|| "-".into());
        let star = if front.is_some_and(|f| f.contains(i)) { "*" } else { " " };
        let note = p.error.as_deref().unwrap_or("");
        println!(
            "{star} {:<10} scale {:<8} error {err:>8} {:>12.0} fps {:>12} bits {note}",
            p.precision.to_string(),
            p.scale,
            p.throughput_fps,
            p.memory_bits
        );
    }
}
