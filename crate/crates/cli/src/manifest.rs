//! Run manifests: every subcommand that writes artifacts drops a
//! `manifest-<subcommand>.toml` next to them holding the fully resolved
//! configuration. Its keys mirror the flags, so `--config <manifest>`
//! reruns the command and reproduces its outputs.

use std::path::{Path, PathBuf};

use qdse_core::{Error, Result};
use serde::Serialize;

fn toml_value(v: impl Serialize) -> Result<toml::Value> {
    toml::Value::try_from(v).map_err(|e| Error::DataFormat(format!("manifest encode: {e}")))
}

/// Write the manifest; returns its path.
pub fn write_manifest(
    out_dir: &Path,
    subcommand: &str,
    resolved_config: impl Serialize,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> Result<PathBuf> {
    let mut table = toml::Table::new();
    table.insert("tool".into(), toml::Value::String("qdse".into()));
    table.insert(
        "version".into(),
        toml::Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    table.insert(
        "subcommand".into(),
        toml::Value::String(subcommand.to_string()),
    );
    match toml_value(resolved_config)? {
        toml::Value::Table(cfg) => table.extend(cfg),
        other => {
            return Err(Error::DataFormat(format!(
                "resolved config must serialize to a table, got {}",
                other.type_str()
            )))
        }
    }
    let paths = |ps: &[PathBuf]| {
        toml::Value::Array(
            ps.iter()
                .map(|p| toml::Value::String(p.display().to_string()))
                .collect(),
        )
    };
    table.insert("inputs".into(), paths(inputs));
    table.insert("outputs".into(), paths(outputs));

    let path = out_dir.join(format!("manifest-{subcommand}.toml"));
    let text = toml::to_string_pretty(&table)
        .map_err(|e| Error::DataFormat(format!("manifest encode: {e}")))?;
    std::fs::write(&path, text)?;
    Ok(path)
}
