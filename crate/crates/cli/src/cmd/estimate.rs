//! `qdse estimate`: hardware cost model for a topology at one or more
//! precisions, without any training.

use std::path::PathBuf;

use clap::Args;
use qdse_core::hwmodel::{roofline, CostMode, HardwareModel, HwEstimate};
use qdse_core::quantize::{standard_precisions, Precision};
use qdse_core::topology::reference_by_name;
use qdse_core::{Error, Result};
use serde::Serialize;

use crate::cmd::Ctx;
use crate::config::{pick, pick_opt};
use crate::manifest::write_manifest;

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Reference topology family: fc, vgg, or alexnet.
    #[arg(long)]
    topology: Option<String>,
    /// Width scale of the reference topology.
    #[arg(long)]
    scale: Option<f64>,
    /// Single precision to estimate; omit for the whole standard set.
    #[arg(long)]
    precision: Option<String>,
    /// Estimate every standard precision even when --precision is given.
    #[arg(long)]
    all_precisions: bool,
    /// Extra pipeline latency term added to #OP x C (clock cycles).
    #[arg(long)]
    delta: Option<f64>,
    /// Resource cost column: optimistic, average, or pessimistic.
    #[arg(long)]
    cost_mode: Option<String>,
    /// TOML device/cost-table description replacing the built-in KU115.
    #[arg(long, value_name = "FILE")]
    device_file: Option<PathBuf>,
    /// Off-chip bandwidth in bytes/s; adds a memory roof to the roofline.
    #[arg(long)]
    bandwidth: Option<f64>,
}

#[derive(Serialize)]
struct ResolvedEstimate {
    topology: String,
    scale: f64,
    precisions: Vec<String>,
    delta: f64,
    cost_mode: String,
    seed: u64,
    out_dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    device_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth: Option<f64>,
}

pub fn run(args: EstimateArgs, ctx: &Ctx) -> Result<()> {
    let family = pick(args.topology, ctx.file.topology.clone(), "fc".into());
    let scale = pick(args.scale, ctx.file.scale, 1.0);
    let delta = pick(args.delta, ctx.file.delta, 0.0);
    let mode: CostMode = pick(
        args.cost_mode,
        ctx.file.cost_mode.clone(),
        CostMode::default().to_string(),
    )
    .parse()?;
    let device_file = args.device_file.or_else(|| ctx.file.device_file.clone());
    let bandwidth = args.bandwidth.or(ctx.file.bandwidth);
    if let Some(bw) = bandwidth {
        if !(bw > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {bw}"
            )));
        }
    }

    let all = args.all_precisions || ctx.file.all_precisions.unwrap_or(false);
    let single = pick_opt(args.precision, ctx.file.precision.clone());
    let precisions: Vec<Precision> = match (&single, all) {
        (Some(name), false) => vec![name.parse()?],
        _ => standard_precisions(),
    };

    let topology = reference_by_name(&family, scale)?;
    let hw = match &device_file {
        Some(path) => HardwareModel::load(path)?,
        None => HardwareModel::default(),
    };

    let resolved = ResolvedEstimate {
        topology: family.clone(),
        scale,
        precisions: precisions.iter().map(|p| p.to_string()).collect(),
        delta,
        cost_mode: mode.to_string(),
        seed: ctx.seed,
        out_dir: ctx.out_dir.display().to_string(),
        device_file: device_file.as_ref().map(|p| p.display().to_string()),
        bandwidth,
    };

    let mut rows = Vec::with_capacity(precisions.len());
    for &p in &precisions {
        let est = hw.estimate(&topology, p, delta, mode)?;
        let attainable = match bandwidth {
            Some(_) => {
                // Weights streamed once per frame set the arithmetic intensity.
                let intensity = est.num_ops as f64 / (est.memory_bits as f64 / 8.0);
                Some(roofline(&hw.device, p, &hw.costs, intensity, bandwidth)?)
            }
            None => None,
        };
        rows.push((est, attainable));
    }

    print_table(&family, scale, &rows);
    let csv_path = ctx.out_dir.join("estimate.csv");
    write_csv(&csv_path, &rows)?;
    let inputs: Vec<PathBuf> = device_file.iter().cloned().collect();
    let manifest = write_manifest(&ctx.out_dir, "estimate", &resolved, &inputs, &[csv_path.clone()])?;
    println!("table:    {}", csv_path.display());
    println!("manifest: {}", manifest.display());
    Ok(())
}

fn print_table(family: &str, scale: f64, rows: &[(HwEstimate, Option<f64>)]) {
    println!("estimate for {family}(scale {scale})");
    let with_roof = rows.iter().any(|(_, a)| a.is_some());
    let mut header = format!(
        "{:<10} {:>12} {:>14} {:>12} {:>8} {:>14} {:>12} {:>8}",
        "precision", "#OP", "C_avg", "C_rel", "", "throughput", "memory", "saving"
    );
    if with_roof {
        header.push_str(&format!(" {:>14}", "attainable"));
    }
    println!("{header}");
    for (est, attainable) in rows {
        let mut line = format!(
            "{:<10} {:>12} {:>14.4e} {:>12.2} {:>8} {:>12.0} fps {:>9.1} Mb {:>7.0}x",
            est.precision,
            est.num_ops,
            est.c_avg,
            est.c_rel,
            est.cost_mode,
            est.throughput_fps,
            est.memory_megabits,
            est.memory_saving,
        );
        if let Some(a) = attainable {
            line.push_str(&format!(" {:>10.3e} op/s", a));
        }
        println!("{line}");
    }
}

fn write_csv(path: &std::path::Path, rows: &[(HwEstimate, Option<f64>)]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| Error::DataFormat(format!("estimate csv: {e}")))?;
    let mut header = vec![
        "precision",
        "cost_mode",
        "num_ops",
        "num_params",
        "c_avg",
        "c_rel",
        "throughput_fps",
        "memory_bits",
        "memory_megabits",
        "memory_saving",
        "compute_roof",
    ];
    let with_roof = rows.iter().any(|(_, a)| a.is_some());
    if with_roof {
        header.push("attainable_ops_per_s");
    }
    w.write_record(&header)
        .map_err(|e| Error::DataFormat(format!("estimate csv: {e}")))?;
    for (est, attainable) in rows {
        let mut record = vec![
            est.precision.clone(),
            est.cost_mode.to_string(),
            est.num_ops.to_string(),
            est.num_params.to_string(),
            est.c_avg.to_string(),
            est.c_rel.to_string(),
            est.throughput_fps.to_string(),
            est.memory_bits.to_string(),
            est.memory_megabits.to_string(),
            est.memory_saving.to_string(),
            est.compute_roof.to_string(),
        ];
        if with_roof {
            record.push(attainable.map(|a| a.to_string()).unwrap_or_default());
        }
        w.write_record(&record)
            .map_err(|e| Error::DataFormat(format!("estimate csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}
