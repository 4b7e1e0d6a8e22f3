//! Dataset generation, IDX ingestion, and heterogeneous partitioning.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Dirichlet, Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A labeled dataset of real feature vectors.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.first().map_or(0, |f| f.len())
    }
}

/// One node's view of a parent dataset: a list of sample indices.
#[derive(Debug, Clone)]
pub struct Shard {
    pub indices: Vec<usize>,
}

/// Gaussian class clusters: class means are seeded random unit directions
/// scaled by `separation`; samples add unit-variance isotropic noise.
/// Labels cycle through the classes so every class is populated.
///
/// `anisotropy` a > 1 makes the second half of the dimensions low-quality:
/// their noise standard deviation becomes a and their class-mean components
/// are scaled by sqrt(a). Those dimensions then carry a large share of the
/// raw class-mean signal but a worse signal-to-noise ratio, so a linear
/// model must gradually rotate its weights toward the clean dimensions
/// instead of converging in one step.
pub fn synth_dataset(
    seed: u64,
    classes: usize,
    dims: usize,
    size: usize,
    separation: f64,
    anisotropy: f64,
) -> Dataset {
    assert!(classes >= 2, "need at least two classes");
    assert!(size >= classes, "need at least one sample per class");
    assert!(anisotropy >= 1.0, "anisotropy must be >= 1");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let noisy_from = if anisotropy > 1.0 { dims / 2 } else { dims };
    let means: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            let raw: Vec<f64> = (0..dims).map(|_| rng.sample(StandardNormal)).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            raw.iter()
                .enumerate()
                .map(|(j, x)| {
                    let scale = if j >= noisy_from { anisotropy.sqrt() } else { 1.0 };
                    x / norm * separation * scale
                })
                .collect()
        })
        .collect();
    let mut features = Vec::with_capacity(size);
    let mut labels = Vec::with_capacity(size);
    for i in 0..size {
        let c = i % classes;
        let x: Vec<f64> = means[c]
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                let sigma = if j >= noisy_from { anisotropy } else { 1.0 };
                m + sigma * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        features.push(x);
        labels.push(c);
    }
    Dataset {
        features,
        labels,
        classes,
    }
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32_be(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::IdxFormat(format!(
            "truncated file: {what} needs bytes {offset}..{end}, file has {}",
            bytes.len()
        )));
    }
    Ok(u32::from_be_bytes(bytes[offset..end].try_into().unwrap()))
}

/// Parses an IDX image/label file pair: big-endian headers, magic
/// 0x00000803 (u8 images, scaled to [0, 1]) and 0x00000801 (u8 labels).
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let img_bytes = std::fs::read(images_path)?;
    let lbl_bytes = std::fs::read(labels_path)?;

    let magic = read_u32_be(&img_bytes, 0, "image magic")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::IdxFormat(format!(
            "bad image magic {magic:#010x} at offset 0, expected {IDX_IMAGES_MAGIC:#010x}"
        )));
    }
    let count = read_u32_be(&img_bytes, 4, "image count")? as usize;
    let rows = read_u32_be(&img_bytes, 8, "row count")? as usize;
    let cols = read_u32_be(&img_bytes, 12, "column count")? as usize;
    let pixels = rows * cols;
    let need = 16 + count * pixels;
    if img_bytes.len() < need {
        return Err(Error::IdxFormat(format!(
            "truncated image data: need {need} bytes, have {}",
            img_bytes.len()
        )));
    }

    let magic = read_u32_be(&lbl_bytes, 0, "label magic")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::IdxFormat(format!(
            "bad label magic {magic:#010x} at offset 0, expected {IDX_LABELS_MAGIC:#010x}"
        )));
    }
    let lbl_count = read_u32_be(&lbl_bytes, 4, "label count")? as usize;
    if lbl_count != count {
        return Err(Error::IdxFormat(format!(
            "count mismatch: {count} images vs {lbl_count} labels"
        )));
    }
    if lbl_bytes.len() < 8 + count {
        return Err(Error::IdxFormat(format!(
            "truncated label data: need {} bytes, have {}",
            8 + count,
            lbl_bytes.len()
        )));
    }

    let features: Vec<Vec<f64>> = (0..count)
        .map(|i| {
            img_bytes[16 + i * pixels..16 + (i + 1) * pixels]
                .iter()
                .map(|&b| b as f64 / 255.0)
                .collect()
        })
        .collect();
    let labels: Vec<usize> = lbl_bytes[8..8 + count].iter().map(|&b| b as usize).collect();
    let classes = labels.iter().copied().max().unwrap_or(0) + 1;
    Ok(Dataset {
        features,
        labels,
        classes,
    })
}

/// Splits fractional class counts into integers summing to `total` by the
/// largest-remainder rule (ties to the lower node index).
fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|&w| w * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|&q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(total - assigned) {
        counts[i] += 1;
    }
    counts
}

/// Heterogeneous split: for each class, a Dirichlet(alpha, ..., alpha) draw
/// over nodes fixes the fraction of that class's samples each node gets.
/// The shards are disjoint and cover the dataset; deterministic per seed.
pub fn dirichlet_split(
    dataset: &Dataset,
    n_nodes: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<Shard>> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    assert!(alpha > 0.0, "alpha must be positive");
    assert!(n_nodes >= 1);
    if n_nodes == 1 {
        return Ok(vec![Shard {
            indices: (0..dataset.len()).collect(),
        }]);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dir = Dirichlet::new(&vec![alpha; n_nodes])
        .expect("valid Dirichlet parameters");
    let mut shards: Vec<Shard> = (0..n_nodes).map(|_| Shard { indices: vec![] }).collect();
    for class in 0..dataset.classes {
        let members: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.labels[i] == class)
            .collect();
        if members.is_empty() {
            continue;
        }
        let weights = dir.sample(&mut rng);
        let counts = largest_remainder(&weights, members.len());
        let mut cursor = 0;
        for (node, &c) in counts.iter().enumerate() {
            shards[node]
                .indices
                .extend_from_slice(&members[cursor..cursor + c]);
            cursor += c;
        }
    }
    Ok(shards)
}
