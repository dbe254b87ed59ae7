//! Dataset loading (IDX, CIFAR-10 binary), synthetic data generation, and
//! dataset manipulation.
//!
//! All images are stored as flat `[n × features]` rows of f64 values on the
//! 8-bit input lattice `{k/255 : 0 <= k <= 255}`, the representation every
//! training input is quantized to.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// A labeled classification dataset with 8-bit-lattice image rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Tensor,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    /// Build a dataset, checking label range and image bounds.
    pub fn new(images: Tensor, labels: Vec<usize>, num_classes: usize) -> Result<Dataset> {
        let (n, _) = images.dim2()?;
        if labels.len() != n {
            return Err(Error::shape(format!(
                "{n} image rows but {} labels",
                labels.len()
            )));
        }
        if num_classes == 0 {
            return Err(Error::arg("num_classes must be positive"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::data(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        if images.data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::data("image values must lie in [0, 1]"));
        }
        Ok(Dataset {
            images,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> usize {
        self.images.shape()[1]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn images(&self) -> &Tensor {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Copy the given rows into a `[batch × features]` tensor plus labels.
    pub fn gather(&self, indices: &[usize]) -> Result<(Tensor, Vec<usize>)> {
        let features = self.features();
        let mut data = Vec::with_capacity(indices.len() * features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::arg(format!(
                    "index {i} out of range for dataset of {}",
                    self.len()
                )));
            }
            data.extend_from_slice(self.images.row(i));
            labels.push(self.labels[i]);
        }
        Ok((Tensor::new([indices.len(), features], data)?, labels))
    }

    /// New dataset holding the given rows (in the given order).
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let (images, labels) = self.gather(indices)?;
        Ok(Dataset {
            images,
            labels,
            num_classes: self.num_classes,
        })
    }

    /// First `n` examples.
    pub fn take(&self, n: usize) -> Result<Dataset> {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }
}

/// Split into `(first, second)` with `|first| = floor(n * fraction)`, after
/// a seeded shuffle. The two halves partition the original rows.
pub fn split(ds: &Dataset, fraction: f64, rng: &mut Rng) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::arg(format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    rng.shuffle(&mut idx);
    let cut = (ds.len() as f64 * fraction).floor() as usize;
    Ok((ds.subset(&idx[..cut])?, ds.subset(&idx[cut..])?))
}

fn read_idx_header(r: &mut impl Read, expect_magic: u32, what: &str) -> Result<Vec<usize>> {
    let magic = r
        .read_u32::<BigEndian>()
        .map_err(|_| Error::data(format!("{what}: truncated IDX header")))?;
    if magic != expect_magic {
        return Err(Error::data(format!(
            "{what}: bad IDX magic {magic:#010x}, expected {expect_magic:#010x}"
        )));
    }
    let ndim = (magic & 0xff) as usize;
    let mut dims = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        let d = r
            .read_u32::<BigEndian>()
            .map_err(|_| Error::data(format!("{what}: truncated IDX dimensions")))?;
        dims.push(d as usize);
    }
    Ok(dims)
}

fn read_exact_payload(r: &mut impl Read, len: usize, what: &str) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)
        .map_err(|_| Error::data(format!("{what}: truncated IDX payload")))?;
    // A well-formed file ends exactly here.
    let mut probe = [0u8; 1];
    if r.read(&mut probe).unwrap_or(0) != 0 {
        return Err(Error::data(format!("{what}: trailing bytes after IDX payload")));
    }
    Ok(buf)
}

/// Parse big-endian IDX image/label file pairs (the MNIST container).
/// Pixel bytes map to the lattice via `byte / 255`; `num_classes` is
/// `max(label) + 1`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let mut ir = BufReader::new(File::open(images_path.as_ref())?);
    let mut lr = BufReader::new(File::open(labels_path.as_ref())?);
    load_idx_readers(&mut ir, &mut lr)
}

/// Reader-level IDX parser (see [`load_idx`]).
pub fn load_idx_readers(images: &mut impl Read, labels: &mut impl Read) -> Result<Dataset> {
    let idims = read_idx_header(images, IDX_IMAGES_MAGIC, "images")?;
    let (n, rows, cols) = match idims[..] {
        [n, r, c] => (n, r, c),
        ref other => {
            return Err(Error::data(format!(
                "images: expected 3 IDX dimensions, got {other:?}"
            )));
        }
    };
    let ldims = read_idx_header(labels, IDX_LABELS_MAGIC, "labels")?;
    let ln = match ldims[..] {
        [ln] => ln,
        ref other => {
            return Err(Error::data(format!(
                "labels: expected 1 IDX dimension, got {other:?}"
            )));
        }
    };
    if ln != n {
        return Err(Error::data(format!("{n} images but {ln} labels")));
    }

    let pixels = read_exact_payload(images, n * rows * cols, "images")?;
    let label_bytes = read_exact_payload(labels, n, "labels")?;

    let data: Vec<f64> = pixels.iter().map(|&b| b as f64 / 255.0).collect();
    let labels: Vec<usize> = label_bytes.iter().map(|&b| b as usize).collect();
    let num_classes = labels.iter().max().map_or(1, |&m| m + 1);
    Dataset::new(Tensor::new([n, rows * cols], data)?, labels, num_classes)
}

/// Write a dataset back to the IDX pair format with the given image
/// geometry (`rows * cols` must equal the feature count). Values must lie
/// on the 8-bit lattice; each is recovered as `round(v * 255)`.
pub fn write_idx(
    ds: &Dataset,
    rows: usize,
    cols: usize,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    if rows * cols != ds.features() {
        return Err(Error::shape(format!(
            "{rows}x{cols} geometry does not match {} features",
            ds.features()
        )));
    }
    let mut iw = BufWriter::new(File::create(images_path.as_ref())?);
    iw.write_u32::<BigEndian>(IDX_IMAGES_MAGIC)?;
    iw.write_u32::<BigEndian>(ds.len() as u32)?;
    iw.write_u32::<BigEndian>(rows as u32)?;
    iw.write_u32::<BigEndian>(cols as u32)?;
    for &v in ds.images().data() {
        iw.write_u8((v * 255.0).round() as u8)?;
    }
    iw.flush()?;

    let mut lw = BufWriter::new(File::create(labels_path.as_ref())?);
    lw.write_u32::<BigEndian>(IDX_LABELS_MAGIC)?;
    lw.write_u32::<BigEndian>(ds.len() as u32)?;
    for &l in ds.labels() {
        lw.write_u8(l as u8)?;
    }
    lw.flush()?;
    Ok(())
}

/// CIFAR-10 binary batches: each record is 1 label byte followed by 3072
/// pixel bytes (3 channels x 32 x 32). Pass every batch file to load.
pub fn load_cifar10(paths: &[impl AsRef<Path>]) -> Result<Dataset> {
    const RECORD: usize = 1 + 3072;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for path in paths {
        let bytes = std::fs::read(path.as_ref())?;
        if bytes.is_empty() || bytes.len() % RECORD != 0 {
            return Err(Error::data(format!(
                "{}: CIFAR-10 batch must be a multiple of {RECORD} bytes",
                path.as_ref().display()
            )));
        }
        for rec in bytes.chunks_exact(RECORD) {
            labels.push(rec[0] as usize);
            data.extend(rec[1..].iter().map(|&b| b as f64 / 255.0));
        }
    }
    let n = labels.len();
    Dataset::new(Tensor::new([n, 3072], data)?, labels, 10)
}

/// Gaussian class clusters for fast tests. Centers are uniform in the unit
/// cube; the per-cluster noise scale is `0.5 / separation`, so larger
/// separations give cleaner (linearly separable) data. Values are clamped
/// to [0, 1] and quantized onto the 8-bit lattice.
pub fn synthetic_blobs(
    rng: &mut Rng,
    n: usize,
    classes: usize,
    dims: usize,
    separation: f64,
) -> Result<Dataset> {
    if classes == 0 || dims == 0 {
        return Err(Error::arg("blobs need at least one class and one dimension"));
    }
    if n < classes {
        return Err(Error::arg(format!(
            "need at least one sample per class ({n} < {classes})"
        )));
    }
    if !(separation > 0.0) {
        return Err(Error::arg(format!("separation must be positive, got {separation}")));
    }

    // Rejection-sample centers to keep them mutually distant; give up after
    // a bounded number of redraws (high dimensions rarely need any).
    let min_dist = 0.5f64.min((dims as f64).sqrt() / (classes as f64 + 1.0));
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(classes);
    let mut attempts = 0;
    while centers.len() < classes {
        let cand = rng.uniform(0.0, 1.0, [dims])?.into_data();
        attempts += 1;
        let far_enough = centers.iter().all(|c| {
            let d2: f64 = c.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() >= min_dist
        });
        if far_enough || attempts > 1000 {
            centers.push(cand);
        }
    }

    let sigma = 0.5 / separation;
    let mut data = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        let noise = rng.normal(0.0, sigma, [dims])?;
        for (d, &nz) in noise.data().iter().enumerate() {
            let v = (centers[class][d] + nz).clamp(0.0, 1.0);
            data.push((v * 255.0).round() / 255.0);
        }
        labels.push(class);
    }
    Dataset::new(Tensor::new([n, dims], data)?, labels, classes)
}
