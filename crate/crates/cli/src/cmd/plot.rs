//! `qdse plot`: render saved explorer results as self-contained SVG
//! scatter plots with plain-CSV data sidecars. Plotting never recomputes
//! any training or hardware number; it only reads the result file.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::Args;
use qdse_core::explorer::{read_csv, read_json, DesignPoint, ExportFormat, PointObjective};
use qdse_core::{Error, Result};
use serde::Serialize;

use crate::cmd::pareto::{format_name, resolve_format};
use crate::cmd::Ctx;
use crate::config::pick_opt;
use crate::manifest::write_manifest;
use crate::svg::scatter;

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Result set written by `qdse explore` or `qdse pareto` (CSV or JSON).
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Input format: csv or json (default: from the file extension).
    #[arg(long)]
    format: Option<String>,
}

#[derive(Serialize)]
struct ResolvedPlot {
    input: String,
    format: String,
    seed: u64,
    out_dir: String,
}

pub fn run(args: PlotArgs, ctx: &Ctx) -> Result<()> {
    let input = pick_opt(args.input, ctx.file.input.clone())
        .ok_or_else(|| Error::InvalidArgument("--input is required".into()))?;
    let format = resolve_format(
        pick_opt(args.format, ctx.file.format.clone()).as_deref(),
        &input,
    )?;
    if !input.is_file() {
        return Err(Error::InvalidArgument(format!(
            "input not found: {}",
            input.display()
        )));
    }

    let (points, flags) = load(&input, format)?;
    let resolved = ResolvedPlot {
        input: input.display().to_string(),
        format: format_name(format).into(),
        seed: ctx.seed,
        out_dir: ctx.out_dir.display().to_string(),
    };

    // Accuracy against each hardware axis; rate/size axes span decades,
    // so those two get log scales.
    let panels = [
        ("plot-throughput", PointObjective::ThroughputFps, true),
        ("plot-memory", PointObjective::MemoryBits, true),
        ("plot-resource", PointObjective::CAvg, false),
    ];
    let mut outputs = Vec::new();
    for (stem, x_obj, log_x) in panels {
        let title = format!("test error vs {x_obj}");
        let (svg, sidecar) = scatter(&points, &flags, x_obj, log_x, &title)?;
        let svg_path = ctx.out_dir.join(format!("{stem}.svg"));
        let csv_path = ctx.out_dir.join(format!("{stem}.csv"));
        std::fs::write(&svg_path, svg)?;
        std::fs::write(&csv_path, sidecar)?;
        outputs.push(svg_path);
        outputs.push(csv_path);
    }

    let manifest = write_manifest(&ctx.out_dir, "plot", &resolved, &[input.clone()], &outputs)?;
    println!("plotted {} points into {} panels", points.len(), panels.len());
    for path in &outputs {
        println!("plot:     {}", path.display());
    }
    println!("manifest: {}", manifest.display());
    Ok(())
}

fn load(path: &PathBuf, format: ExportFormat) -> Result<(Vec<DesignPoint>, Vec<bool>)> {
    let reader = BufReader::new(File::open(path)?);
    match format {
        ExportFormat::Csv => read_csv(reader),
        ExportFormat::Json => {
            let doc = read_json(reader)?;
            let flags = (0..doc.points.len())
                .map(|i| doc.frontier.as_ref().is_some_and(|f| f.contains(i)))
                .collect();
            Ok((doc.points, flags))
        }
    }
}
