//! Result persistence: CSV and a structured JSON record, both versioned,
//! both round-tripping back into [`DesignPoint`] lists.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explorer::grid::DesignPoint;
use crate::explorer::pareto::ParetoFront;

pub const EXPLORER_FORMAT_VERSION: u32 = 1;

/// Fixed CSV column order; the leading columns are the plotting contract.
const CSV_HEADER: [&str; 13] = [
    "precision",
    "scale",
    "test_error",
    "memory_bits",
    "num_ops",
    "c_avg",
    "throughput_fps",
    "on_frontier",
    "topology",
    "epochs",
    "seed",
    "activation",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ExportFormat> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" | "structured" => Ok(ExportFormat::Json),
            other => Err(Error::arg(format!(
                "unknown export format '{other}' (expected csv or json)"
            ))),
        }
    }
}

impl std::fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        })
    }
}

/// The structured-record document: everything needed to reload a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorerDoc {
    pub version: u32,
    pub points: Vec<DesignPoint>,
    pub frontier: Option<ParetoFront>,
}

fn check_front(points: &[DesignPoint], front: Option<&ParetoFront>) -> Result<()> {
    if let Some(front) = front {
        if let Some(&bad) = front.members.iter().find(|&&i| i >= points.len()) {
            return Err(Error::arg(format!(
                "frontier references point {bad} but only {} points are being written",
                points.len()
            )));
        }
    }
    Ok(())
}

/// Write the fixed-column CSV. Frontier membership lands in `on_frontier`.
pub fn write_csv(
    points: &[DesignPoint],
    front: Option<&ParetoFront>,
    writer: impl Write,
) -> Result<()> {
    check_front(points, front)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)
        .map_err(|e| Error::data(format!("csv write: {e}")))?;
    for (i, p) in points.iter().enumerate() {
        let on_front = front.map_or(false, |f| f.contains(i));
        let record = [
            p.precision.to_string(),
            p.scale.to_string(),
            p.test_error.map(|v| v.to_string()).unwrap_or_default(),
            p.memory_bits.to_string(),
            p.num_ops.to_string(),
            p.c_avg.to_string(),
            p.throughput_fps.to_string(),
            on_front.to_string(),
            p.topology.clone(),
            p.epochs.to_string(),
            p.seed.to_string(),
            p.activation.map(|a| a.to_string()).unwrap_or_default(),
            p.error.clone().unwrap_or_default(),
        ];
        w.write_record(&record)
            .map_err(|e| Error::data(format!("csv write: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(row: usize, name: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| {
        Error::data(format!("csv row {row}: bad {name} value '{raw}'"))
    })
}

/// Read a CSV written by [`write_csv`]: the points plus each row's
/// frontier flag.
pub fn read_csv(reader: impl Read) -> Result<(Vec<DesignPoint>, Vec<bool>)> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r
        .headers()
        .map_err(|e| Error::data(format!("csv read: {e}")))?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::data(format!(
            "unexpected csv header '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points = Vec::new();
    let mut flags = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::data(format!("csv row {i}: {e}")))?;
        if record.len() != CSV_HEADER.len() {
            return Err(Error::data(format!(
                "csv row {i}: {} fields, expected {}",
                record.len(),
                CSV_HEADER.len()
            )));
        }
        let field = |j: usize| record.get(j).unwrap_or_default();
        let optional = |j: usize| {
            let raw = field(j);
            (!raw.is_empty()).then(|| raw.to_string())
        };
        points.push(DesignPoint {
            precision: parse_field(i, "precision", field(0))?,
            scale: parse_field(i, "scale", field(1))?,
            test_error: optional(2)
                .map(|raw| parse_field(i, "test_error", &raw))
                .transpose()?,
            memory_bits: parse_field(i, "memory_bits", field(3))?,
            num_ops: parse_field(i, "num_ops", field(4))?,
            c_avg: parse_field(i, "c_avg", field(5))?,
            throughput_fps: parse_field(i, "throughput_fps", field(6))?,
            topology: field(8).to_string(),
            epochs: parse_field(i, "epochs", field(9))?,
            seed: parse_field(i, "seed", field(10))?,
            activation: optional(11)
                .map(|raw| parse_field(i, "activation", &raw))
                .transpose()?,
            error: optional(12),
        });
        flags.push(parse_field(i, "on_frontier", field(7))?);
    }
    Ok((points, flags))
}

/// Write the structured JSON document.
pub fn write_json(
    points: &[DesignPoint],
    front: Option<&ParetoFront>,
    writer: impl Write,
) -> Result<()> {
    check_front(points, front)?;
    let doc = ExplorerDoc {
        version: EXPLORER_FORMAT_VERSION,
        points: points.to_vec(),
        frontier: front.cloned(),
    };
    let mut writer = writer;
    serde_json::to_writer_pretty(&mut writer, &doc)
        .map_err(|e| Error::data(format!("json write: {e}")))?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_json(reader: impl Read) -> Result<ExplorerDoc> {
    let doc: ExplorerDoc =
        serde_json::from_reader(reader).map_err(|e| Error::data(format!("json read: {e}")))?;
    if doc.version == 0 || doc.version > EXPLORER_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: doc.version,
            supported: EXPLORER_FORMAT_VERSION,
        });
    }
    if let Some(front) = &doc.frontier {
        check_front(&doc.points, Some(front))?;
    }
    Ok(doc)
}

/// Persist a sweep to `path` in the chosen format.
pub fn export(
    points: &[DesignPoint],
    front: Option<&ParetoFront>,
    path: impl AsRef<Path>,
    format: ExportFormat,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let buf = std::io::BufWriter::new(file);
    match format {
        ExportFormat::Csv => write_csv(points, front, buf),
        ExportFormat::Json => write_json(points, front, buf),
    }
}

/// Reload just the point list from a file written by [`export`].
pub fn import_points(path: impl AsRef<Path>, format: ExportFormat) -> Result<Vec<DesignPoint>> {
    let file = std::fs::File::open(path)?;
    let buf = std::io::BufReader::new(file);
    match format {
        ExportFormat::Csv => Ok(read_csv(buf)?.0),
        ExportFormat::Json => Ok(read_json(buf)?.points),
    }
}
