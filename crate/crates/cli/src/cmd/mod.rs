//! Subcommand implementations.

pub mod estimate;
pub mod eval;
pub mod explore;
pub mod pareto;
pub mod plot;
pub mod train;

use std::path::PathBuf;

use qdse_core::{Error, Result};

use crate::config::FileConfig;

/// Globals resolved once in `main`: every subcommand sees the same seed,
/// output directory, and config-file values.
pub struct Ctx {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub file: FileConfig,
}

/// Split a comma-separated flag value, rejecting an empty list.
pub(crate) fn split_list(list: &str, flag: &str) -> Result<Vec<String>> {
    let items: Vec<String> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    if items.is_empty() {
        return Err(Error::InvalidArgument(format!("{flag} is an empty list")));
    }
    Ok(items)
}
