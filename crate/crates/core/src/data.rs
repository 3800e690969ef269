//! Dataset synthesis, IDX loading, and per-agent sharding.
//!
//! Shards are index views into an immutable parent dataset; within a shard
//! the indices are kept sorted so every sample sum runs in a canonical
//! order regardless of how a batch was drawn.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;

const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone)]
pub enum Provenance {
    Synthetic { seed: u64 },
    IdxFiles { images: PathBuf, labels: PathBuf },
    Derived,
}

/// Immutable feature/label table shared by all agents.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        n_classes: usize,
        provenance: Provenance,
    ) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::Parameter("dataset must have at least one row".into()));
        }
        if features.nrows() != labels.len() {
            return Err(Error::Parameter(format!(
                "{} feature rows vs {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if n_classes > 0 {
            if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
                return Err(Error::Parameter(format!(
                    "label {bad} outside declared class count {n_classes}"
                )));
            }
        }
        Ok(Self {
            features,
            labels,
            n_classes,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Keep only the first `limit` samples.
    pub fn truncated(&self, limit: usize) -> Result<Self> {
        if limit == 0 || limit > self.len() {
            return Err(Error::Parameter(format!(
                "limit {limit} outside 1..={}",
                self.len()
            )));
        }
        Dataset::new(
            self.features.slice(ndarray::s![..limit, ..]).to_owned(),
            self.labels[..limit].to_vec(),
            self.n_classes,
            Provenance::Derived,
        )
    }

    /// Per-dimension zero mean, unit variance. Opt-in only: reported
    /// objective constants refer to the data actually used. Returns the
    /// standardized copy plus the (mean, std) pairs for applying the same
    /// transform to held-out data.
    pub fn standardized(&self) -> (Self, Vec<(f64, f64)>) {
        let n = self.len() as f64;
        let moments: Vec<(f64, f64)> = (0..self.dim())
            .map(|c| {
                let col = self.features.column(c);
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                (mean, if var > 0.0 { var.sqrt() } else { 1.0 })
            })
            .collect();
        (self.with_moments(&moments), moments)
    }

    /// Apply standardization moments computed elsewhere (e.g. on the
    /// training split).
    pub fn with_moments(&self, moments: &[(f64, f64)]) -> Self {
        let mut features = self.features.clone();
        for (c, &(mean, std)) in moments.iter().enumerate() {
            features.column_mut(c).mapv_inplace(|v| (v - mean) / std);
        }
        Self {
            features,
            labels: self.labels.clone(),
            n_classes: self.n_classes,
            provenance: Provenance::Derived,
        }
    }

    /// Split off a held-out fraction (last part of a seeded shuffle).
    /// Returns (retained, held_out).
    pub fn split_holdout(&self, fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::Parameter(format!(
                "holdout fraction must lie in [0, 1), got {fraction}"
            )));
        }
        let n = self.len();
        let held = (n as f64 * fraction).round() as usize;
        if held == 0 {
            return Ok((self.clone(), self.clone()));
        }
        if held >= n {
            return Err(Error::Parameter("holdout would consume every sample".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::stream(seed, rng::STREAM_HOLDOUT));
        let (train_idx, val_idx) = order.split_at(n - held);
        Ok((self.subset(train_idx), self.subset(val_idx)))
    }

    fn subset(&self, indices: &[usize]) -> Self {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        let features = Array2::from_shape_fn((sorted.len(), self.dim()), |(r, c)| {
            self.features[[sorted[r], c]]
        });
        let labels = sorted.iter().map(|&i| self.labels[i]).collect();
        Self {
            features,
            labels,
            n_classes: self.n_classes,
            provenance: Provenance::Derived,
        }
    }
}

/// Index view owned by one agent. Indices are disjoint across agents,
/// exhaustive over the parent dataset, and sorted ascending.
#[derive(Debug, Clone)]
pub struct DatasetShard {
    owner_agent: usize,
    sample_indices: Vec<usize>,
}

impl DatasetShard {
    pub fn owner_agent(&self) -> usize {
        self.owner_agent
    }

    pub fn indices(&self) -> &[usize] {
        &self.sample_indices
    }

    pub fn len(&self) -> usize {
        self.sample_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_indices.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PartitionScheme {
    /// Global shuffle, then contiguous split with sizes differing by at
    /// most one (remainder to the lowest-index agents).
    Iid { seed: u64 },
    /// Sort by label, then split: a deliberately non-IID stressor.
    LabelSorted,
}

/// Split a dataset into per-agent shards.
pub fn partition(
    dataset: &Dataset,
    n_agents: usize,
    scheme: PartitionScheme,
) -> Result<Vec<DatasetShard>> {
    let n = dataset.len();
    if n_agents == 0 {
        return Err(Error::Parameter("n_agents must be >= 1".into()));
    }
    if n_agents > n {
        return Err(Error::Parameter(format!(
            "cannot split {n} samples across {n_agents} agents"
        )));
    }
    let order: Vec<usize> = match scheme {
        PartitionScheme::Iid { seed } => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng::stream(seed, rng::STREAM_PARTITION));
            order
        }
        PartitionScheme::LabelSorted => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| dataset.labels()[i]);
            order
        }
    };

    let base = n / n_agents;
    let remainder = n % n_agents;
    let mut shards = Vec::with_capacity(n_agents);
    let mut cursor = 0;
    for agent in 0..n_agents {
        let size = base + usize::from(agent < remainder);
        let mut sample_indices = order[cursor..cursor + size].to_vec();
        sample_indices.sort_unstable();
        shards.push(DatasetShard {
            owner_agent: agent,
            sample_indices,
        });
        cursor += size;
    }
    Ok(shards)
}

/// One shard covering the whole dataset (centralized baselines).
pub fn full_shard(dataset: &Dataset) -> DatasetShard {
    DatasetShard {
        owner_agent: 0,
        sample_indices: (0..dataset.len()).collect(),
    }
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Isotropic Gaussian blobs with deterministic, mean-centered class centers
/// at pairwise distance >= `separation`.
///
/// With `classes <= dim` the centers sit on scaled coordinate axes
/// (mutually equidistant); otherwise they are spaced along the first axis.
pub fn generate_blobs(
    n: usize,
    dim: usize,
    classes: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if classes < 2 || n < classes {
        return Err(Error::Parameter(format!(
            "need n >= classes >= 2, got n={n}, classes={classes}"
        )));
    }
    if dim == 0 || separation <= 0.0 {
        return Err(Error::Parameter(
            "dim must be >= 1 and separation positive".into(),
        ));
    }

    let mut centers = Array2::zeros((classes, dim));
    if classes <= dim {
        let scale = separation / 2f64.sqrt();
        for c in 0..classes {
            centers[[c, c]] = scale;
        }
    } else {
        for c in 0..classes {
            centers[[c, 0]] = separation * c as f64;
        }
    }
    for c in 0..dim {
        let mean = centers.column(c).sum() / classes as f64;
        centers.column_mut(c).mapv_inplace(|v| v - mean);
    }

    let mut stream = rng::stream(seed, rng::STREAM_DATA);
    let mut features = Array2::zeros((n, dim));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % classes;
        labels.push(label);
        for c in 0..dim {
            let noise: f64 = stream.sample(StandardNormal);
            features[[i, c]] = centers[[label, c]] + noise;
        }
    }
    Dataset::new(features, labels, classes, Provenance::Synthetic { seed })
}

/// Zero-mean Gaussian rows used as per-sample linear perturbations of a
/// quadratic objective: sample i contributes gradient `A x - b - z_i`.
/// Column means are subtracted exactly, so the full-data gradient equals
/// the unperturbed one and `sigma` controls only the minibatch noise.
pub fn generate_gradient_noise(n: usize, dim: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || dim == 0 {
        return Err(Error::Parameter("need n >= 1 and dim >= 1".into()));
    }
    if sigma < 0.0 {
        return Err(Error::Parameter(format!("sigma must be >= 0, got {sigma}")));
    }
    let mut stream = rng::stream(seed, rng::STREAM_DATA);
    let mut features = Array2::zeros((n, dim));
    if sigma > 0.0 {
        for i in 0..n {
            for c in 0..dim {
                let noise: f64 = stream.sample(StandardNormal);
                features[[i, c]] = sigma * noise;
            }
        }
        for c in 0..dim {
            let mean = features.column(c).sum() / n as f64;
            features.column_mut(c).mapv_inplace(|v| v - mean);
        }
    }
    Dataset::new(features, vec![0; n], 1, Provenance::Synthetic { seed })
}

// ---------------------------------------------------------------------------
// IDX files
// ---------------------------------------------------------------------------

/// Parse big-endian IDX image/label pairs; pixels are scaled to [0, 1].
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let image_bytes = std::fs::read(images_path)?;
    let label_bytes = std::fs::read(labels_path)?;

    let mut img = IdxReader::new(&image_bytes);
    let magic = img.read_u32()?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::IdxMagic {
            expected: IDX_IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = img.read_u32()? as usize;
    let rows = img.read_u32()? as usize;
    let cols = img.read_u32()? as usize;
    let pixels = img.read_bytes(count * rows * cols)?;

    let mut lbl = IdxReader::new(&label_bytes);
    let magic = lbl.read_u32()?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::IdxMagic {
            expected: IDX_LABEL_MAGIC,
            found: magic,
        });
    }
    let label_count = lbl.read_u32()? as usize;
    if label_count != count {
        return Err(Error::IdxCountMismatch {
            images: count,
            labels: label_count,
        });
    }
    let raw_labels = lbl.read_bytes(label_count)?;

    let dim = rows * cols;
    let features = Array2::from_shape_fn((count, dim), |(r, c)| {
        f64::from(pixels[r * dim + c]) / 255.0
    });
    let labels: Vec<usize> = raw_labels.iter().map(|&b| b as usize).collect();
    let n_classes = labels.iter().copied().max().unwrap_or(0) + 1;
    Dataset::new(
        features,
        labels,
        n_classes,
        Provenance::IdxFiles {
            images: images_path.to_path_buf(),
            labels: labels_path.to_path_buf(),
        },
    )
}

struct IdxReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> IdxReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn read_u32(&mut self) -> Result<u32> {
        let slice = self.read_bytes(4)?;
        Ok(u32::from_be_bytes([slice[0], slice[1], slice[2], slice[3]]))
    }

    fn read_bytes(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::IdxTruncated {
                needed: self.pos + len,
                found: self.bytes.len(),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }
}

// ---------------------------------------------------------------------------
// Epoch-shuffle batch sampling
// ---------------------------------------------------------------------------

/// Draws minibatches by reshuffling the owning agent's shard once per
/// epoch and walking it in contiguous chunks. The returned batches are
/// sorted ascending, so downstream sums do not depend on draw order.
#[derive(Debug, Clone)]
pub struct EpochSampler {
    shard_indices: Vec<usize>,
    order: Vec<usize>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl EpochSampler {
    pub fn new(shard: &DatasetShard, rng: ChaCha8Rng) -> Self {
        let shard_indices = shard.indices().to_vec();
        let order = shard_indices.clone();
        let cursor = order.len(); // force a shuffle on the first draw
        Self {
            shard_indices,
            order,
            cursor,
            rng,
        }
    }

    pub fn shard_len(&self) -> usize {
        self.shard_indices.len()
    }

    /// Next batch of (up to) `batch_size` global sample indices. The final
    /// batch of an epoch may be shorter when the shard size is not a
    /// multiple of `batch_size`; gradients divide by the actual length.
    pub fn next_batch(&mut self, batch_size: usize) -> Result<Vec<usize>> {
        let n = self.shard_indices.len();
        if batch_size == 0 || batch_size > n {
            return Err(Error::Parameter(format!(
                "batch size {batch_size} outside 1..={n}"
            )));
        }
        if self.cursor >= n {
            self.order.copy_from_slice(&self.shard_indices);
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let take = batch_size.min(n - self.cursor);
        let mut batch = self.order[self.cursor..self.cursor + take].to_vec();
        self.cursor += take;
        batch.sort_unstable();
        Ok(batch)
    }
}

/// Steps needed to walk a shard of `shard_len` once in chunks of `batch`.
pub fn steps_per_epoch(shard_len: usize, batch: usize) -> usize {
    shard_len.div_ceil(batch)
}
