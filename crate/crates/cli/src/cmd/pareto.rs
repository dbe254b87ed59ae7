//! `qdse pareto`: recompute the non-dominated frontier of a saved result
//! set, without retraining or re-estimating anything.

use std::path::{Path, PathBuf};

use clap::Args;
use qdse_core::explorer::{export, import_points, pareto_front, ExportFormat, PointObjective};
use qdse_core::{Error, Result};
use serde::Serialize;

use crate::cmd::{split_list, Ctx};
use crate::config::pick_opt;
use crate::manifest::write_manifest;

#[derive(Debug, Args)]
pub struct ParetoArgs {
    /// Result set written by `qdse explore` (CSV or JSON).
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Input format: csv or json (default: from the file extension).
    #[arg(long)]
    format: Option<String>,
    /// Comma-separated objectives (default: test_error,throughput_fps).
    #[arg(long, value_name = "LIST")]
    objectives: Option<String>,
}

#[derive(Serialize)]
struct ResolvedPareto {
    input: String,
    format: String,
    objectives: Vec<String>,
    seed: u64,
    out_dir: String,
}

pub fn run(args: ParetoArgs, ctx: &Ctx) -> Result<()> {
    let input = pick_opt(args.input, ctx.file.input.clone())
        .ok_or_else(|| Error::InvalidArgument("--input is required".into()))?;
    let format = resolve_format(
        pick_opt(args.format, ctx.file.format.clone()).as_deref(),
        &input,
    )?;
    let objectives = parse_objectives(args.objectives, ctx.file.objectives.clone())?;
    if !input.is_file() {
        return Err(Error::InvalidArgument(format!(
            "input not found: {}",
            input.display()
        )));
    }

    let resolved = ResolvedPareto {
        input: input.display().to_string(),
        format: format_name(format).into(),
        objectives: objectives.iter().map(|o| o.to_string()).collect(),
        seed: ctx.seed,
        out_dir: ctx.out_dir.display().to_string(),
    };

    let points = import_points(&input, format)?;
    let front = pareto_front(&points, &objectives)?;

    let csv_path = ctx.out_dir.join("pareto.csv");
    let json_path = ctx.out_dir.join("pareto.json");
    export(&points, Some(&front), &csv_path, ExportFormat::Csv)?;
    export(&points, Some(&front), &json_path, ExportFormat::Json)?;
    let manifest = write_manifest(
        &ctx.out_dir,
        "pareto",
        &resolved,
        &[input.clone()],
        &[csv_path.clone(), json_path.clone()],
    )?;

    println!(
        "frontier over {:?}: {} of {} points non-dominated",
        resolved.objectives,
        front.len(),
        points.len()
    );
    for &i in &front.members {
        let p = &points[i];
        let err = p
            .test_error
            .map(|e| format!("{e:.4}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "* {:<10} scale {:<8} error {err:>8} {:>12.0} fps {:>12} bits",
            p.precision.to_string(),
            p.scale,
            p.throughput_fps,
            p.memory_bits
        );
    }
    println!("frontier: {}", csv_path.display());
    println!("frontier: {}", json_path.display());
    println!("manifest: {}", manifest.display());
    Ok(())
}

pub(crate) fn resolve_format(flag: Option<&str>, path: &Path) -> Result<ExportFormat> {
    if let Some(name) = flag {
        return name.parse();
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => ext.parse().map_err(|_| {
            Error::InvalidArgument(format!(
                "cannot infer format from extension '.{ext}'; pass --format csv|json"
            ))
        }),
        None => Err(Error::InvalidArgument(
            "input has no extension; pass --format csv|json".into(),
        )),
    }
}

pub(crate) fn format_name(format: ExportFormat) -> &'static str {
    match format {
        ExportFormat::Csv => "csv",
        ExportFormat::Json => "json",
    }
}

/// Objectives from the comma-list flag, the config-file array, or the
/// default accuracy/throughput pair, in that order of preference.
pub(crate) fn parse_objectives(
    flag: Option<String>,
    file: Option<Vec<String>>,
) -> Result<Vec<PointObjective>> {
    let names = match flag {
        Some(list) => Some(split_list(&list, "--objectives")?),
        None => file,
    };
    match names {
        None => Ok(vec![PointObjective::TestError, PointObjective::ThroughputFps]),
        Some(names) => {
            if names.is_empty() {
                return Err(Error::InvalidArgument("--objectives is an empty list".into()));
            }
            names.iter().map(|s| s.parse()).collect()
        }
    }
}
