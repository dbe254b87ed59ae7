//! Dataset resolution shared by the train/eval/explore subcommands: IDX
//! files from a directory, or a seeded synthetic stand-in for quick runs.

use std::path::PathBuf;

use qdse_core::dataio::{load_idx, split, synthetic_blobs, Dataset};
use qdse_core::rng::{derive_seed, Rng};
use qdse_core::{Error, Result};
use serde::Serialize;

const IDX_NAMES: [(&str, &str); 2] = [
    ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
];

/// Resolved data source, recorded in the run manifest.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum DataSource {
    Idx { data_dir: PathBuf },
    Synthetic { synthetic: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct DataSpec {
    #[serde(flatten)]
    pub source: DataSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
}

impl DataSpec {
    /// Combine the data flags; `--synthetic` wins over `--data-dir`, and
    /// with neither the conventional `data/mnist` directory is assumed.
    pub fn resolve(
        data_dir: Option<PathBuf>,
        synthetic: Option<usize>,
        limit: Option<usize>,
    ) -> DataSpec {
        let source = match (synthetic, data_dir) {
            (Some(n), _) => DataSource::Synthetic { synthetic: n },
            (None, Some(dir)) => DataSource::Idx { data_dir: dir },
            (None, None) => DataSource::Idx {
                data_dir: PathBuf::from("data/mnist"),
            },
        };
        DataSpec { source, limit }
    }

    /// The input files this spec will read, for the manifest and for
    /// fail-fast existence checks.
    pub fn input_paths(&self) -> Vec<PathBuf> {
        match &self.source {
            DataSource::Idx { data_dir } => IDX_NAMES
                .iter()
                .flat_map(|(imgs, lbls)| [data_dir.join(imgs), data_dir.join(lbls)])
                .collect(),
            DataSource::Synthetic { .. } => Vec::new(),
        }
    }

    /// Error before any compute if an input file is missing.
    pub fn check(&self) -> Result<()> {
        for path in self.input_paths() {
            if !path.is_file() {
                return Err(Error::InvalidArgument(format!(
                    "dataset file not found: {}",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    /// Load (train, test). Synthetic data derives from `seed`, so a rerun
    /// with the same manifest sees identical examples.
    pub fn load(&self, seed: u64) -> Result<(Dataset, Dataset)> {
        self.check()?;
        let (mut train, test) = match &self.source {
            DataSource::Idx { data_dir } => {
                let (imgs, lbls) = IDX_NAMES[0];
                let train = load_idx(data_dir.join(imgs), data_dir.join(lbls))?;
                let (imgs, lbls) = IDX_NAMES[1];
                let test = load_idx(data_dir.join(imgs), data_dir.join(lbls))?;
                (train, test)
            }
            DataSource::Synthetic { synthetic } => {
                // One draw, then a seeded split: train and test must share
                // the same class centers or evaluation is meaningless.
                let n = (*synthetic).max(10);
                let test_n = (n / 4).max(40);
                let mut rng = Rng::new(derive_seed(seed, "synthetic"));
                let full = synthetic_blobs(&mut rng, n + test_n, 10, 784, 6.0)?;
                let fraction = n as f64 / (n + test_n) as f64;
                split(&full, fraction, &mut rng)?
            }
        };
        if let Some(limit) = self.limit {
            train = train.take(limit.min(train.len()))?;
        }
        Ok((train, test))
    }
}
