//! Loading, writing, and splitting of the CIFAR-10 binary format.
//!
//! A batch file is a sequence of 3073-byte records: one label byte in
//! `0..=9` followed by 3072 pixel bytes laid out channel-planar (1024 red,
//! 1024 green, 1024 blue, each row-major 32x32). Pixels are widened to `f64`
//! on load so downstream numeric stages never re-convert.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Pixels per image: 3 channels x 32 x 32.
pub const IMAGE_DIM: usize = 3072;
/// Number of CIFAR-10 classes.
pub const NUM_CLASSES: usize = 10;
/// Bytes per record in a batch file: label byte plus pixels.
pub const RECORD_BYTES: usize = 1 + IMAGE_DIM;

/// Class names in label order, used when no `batches.meta.txt` is present.
pub const DEFAULT_CLASS_NAMES: [&str; NUM_CLASSES] = [
    "airplane",
    "automobile",
    "bird",
    "cat",
    "deer",
    "dog",
    "frog",
    "horse",
    "ship",
    "truck",
];

/// The five training batch file names, in concatenation order.
pub const TRAIN_BATCH_FILES: [&str; 5] = [
    "data_batch_1.bin",
    "data_batch_2.bin",
    "data_batch_3.bin",
    "data_batch_4.bin",
    "data_batch_5.bin",
];

/// The evaluation batch file name.
pub const TEST_BATCH_FILE: &str = "test_batch.bin";

/// An in-memory labeled image set. Rows of `features` follow file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
    pub class_names: Vec<String>,
}

impl Dataset {
    /// Build a dataset from parts, checking the label/feature agreement that
    /// every other function in this module relies on.
    pub fn new(features: Array2<f64>, labels: Vec<u8>, class_names: Vec<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if class_names.len() != NUM_CLASSES {
            return Err(Error::Config(format!(
                "expected {} class names, got {}",
                NUM_CLASSES,
                class_names.len()
            )));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l as usize >= NUM_CLASSES)
        {
            return Err(Error::Format(format!("label {l} out of range at row {i}")));
        }
        Ok(Dataset { features, labels, class_names })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Copy the given rows (in the given order) into a new dataset.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Shape(format!("row index {bad} out of range for {} rows", self.len())));
        }
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Ok(Dataset { features, labels, class_names: self.class_names.clone() })
    }
}

pub fn default_class_names() -> Vec<String> {
    DEFAULT_CLASS_NAMES.iter().map(|s| s.to_string()).collect()
}

/// Read class names from `batches.meta.txt` next to a batch file. Returns
/// `None` when the file is absent or does not hold ten non-empty lines.
fn read_class_names(dir: &Path) -> Option<Vec<String>> {
    let text = fs::read_to_string(dir.join("batches.meta.txt")).ok()?;
    let names: Vec<String> =
        text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect();
    if names.len() >= NUM_CLASSES {
        Some(names[..NUM_CLASSES].to_vec())
    } else {
        None
    }
}

/// Load one binary batch file. Row order matches record order in the file.
pub fn load_cifar_batch(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.is_empty() || bytes.len() % RECORD_BYTES != 0 {
        return Err(Error::Format(format!(
            "{}: {} bytes is not a whole number of {}-byte records",
            path.display(),
            bytes.len(),
            RECORD_BYTES
        )));
    }
    let n = bytes.len() / RECORD_BYTES;
    let mut features = Array2::<f64>::zeros((n, IMAGE_DIM));
    let mut labels = Vec::with_capacity(n);
    for (i, record) in bytes.chunks_exact(RECORD_BYTES).enumerate() {
        let label = record[0];
        if label as usize >= NUM_CLASSES {
            return Err(Error::Format(format!(
                "{}: label {} out of range in record {}",
                path.display(),
                label,
                i
            )));
        }
        labels.push(label);
        let mut row = features.row_mut(i);
        let row = row.as_slice_mut().expect("freshly allocated row-major matrix");
        for (dst, &src) in row.iter_mut().zip(&record[1..]) {
            *dst = src as f64;
        }
    }
    let class_names = path
        .parent()
        .and_then(read_class_names)
        .unwrap_or_else(default_class_names);
    Ok(Dataset { features, labels, class_names })
}

/// Load the standard directory layout: five training batches concatenated in
/// order, plus the test batch.
pub fn load_cifar_dir(dir: impl AsRef<Path>) -> Result<(Dataset, Dataset)> {
    let dir = dir.as_ref();
    let mut batches = Vec::with_capacity(TRAIN_BATCH_FILES.len());
    for name in TRAIN_BATCH_FILES {
        batches.push(load_cifar_batch(dir.join(name))?);
    }
    let train = concat(&batches)?;
    let test = load_cifar_batch(dir.join(TEST_BATCH_FILE))?;
    Ok((train, test))
}

/// Serialize a dataset back to the binary batch format. Requires 3072-column
/// features whose values are integers in `0..=255`, i.e. untransformed pixels.
pub fn write_cifar_batch(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if ds.dim() != IMAGE_DIM {
        return Err(Error::Shape(format!(
            "can only serialize {}-column pixel datasets, got {} columns",
            IMAGE_DIM,
            ds.dim()
        )));
    }
    let mut bytes = Vec::with_capacity(ds.len() * RECORD_BYTES);
    for (i, (row, &label)) in ds.features.rows().into_iter().zip(&ds.labels).enumerate() {
        bytes.push(label);
        for &v in row {
            if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
                return Err(Error::Format(format!(
                    "row {i} holds {v}, not an integer pixel value in 0..=255"
                )));
            }
            bytes.push(v as u8);
        }
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Concatenate datasets in argument order, preserving row order within each.
pub fn concat(parts: &[Dataset]) -> Result<Dataset> {
    let first = parts.first().ok_or_else(|| Error::Config("concat of zero datasets".into()))?;
    let dim = first.dim();
    if let Some(bad) = parts.iter().find(|p| p.dim() != dim) {
        return Err(Error::Shape(format!(
            "cannot concat {}-column dataset with {}-column dataset",
            dim,
            bad.dim()
        )));
    }
    let total: usize = parts.iter().map(Dataset::len).sum();
    let mut features = Array2::<f64>::zeros((total, dim));
    let mut labels = Vec::with_capacity(total);
    let mut at = 0;
    for p in parts {
        features.slice_mut(ndarray::s![at..at + p.len(), ..]).assign(&p.features);
        labels.extend_from_slice(&p.labels);
        at += p.len();
    }
    Ok(Dataset { features, labels, class_names: first.class_names.clone() })
}

/// A reproducible train/validation partition by row index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
    pub seed: u64,
}

impl SplitSpec {
    /// Check that the two sides are sorted, disjoint, and cover `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for (side, indices) in
            [("train", &self.train_indices), ("validation", &self.validation_indices)]
        {
            if !indices.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Format(format!("{side} indices not strictly increasing")));
            }
            for &i in indices.iter() {
                if i >= n {
                    return Err(Error::Format(format!("{side} index {i} out of range for {n} rows")));
                }
                if seen[i] {
                    return Err(Error::Format(format!("index {i} appears on both sides")));
                }
                seen[i] = true;
            }
        }
        if self.train_indices.len() + self.validation_indices.len() != n {
            return Err(Error::Format(format!(
                "split covers {} of {} rows",
                self.train_indices.len() + self.validation_indices.len(),
                n
            )));
        }
        Ok(())
    }

    /// Plain-text form: a `seed` line, then one index per line under the
    /// `train` and `validation` section markers.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = format!("seed {}\ntrain\n", self.seed);
        for i in &self.train_indices {
            text.push_str(&format!("{i}\n"));
        }
        text.push_str("validation\n");
        for i in &self.validation_indices {
            text.push_str(&format!("{i}\n"));
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let seed_line = lines.next().ok_or_else(|| Error::Format("empty split file".into()))?;
        let seed = seed_line
            .strip_prefix("seed ")
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| Error::Format(format!("bad seed line {seed_line:?}")))?;
        if lines.next() != Some("train") {
            return Err(Error::Format("expected 'train' section marker".into()));
        }
        let mut train_indices = Vec::new();
        let mut validation_indices = Vec::new();
        let mut in_validation = false;
        for line in lines {
            if line.is_empty() {
                continue;
            }
            if line == "validation" {
                if in_validation {
                    return Err(Error::Format("duplicate 'validation' marker".into()));
                }
                in_validation = true;
                continue;
            }
            let idx: usize =
                line.parse().map_err(|_| Error::Format(format!("bad index line {line:?}")))?;
            if in_validation {
                validation_indices.push(idx);
            } else {
                train_indices.push(idx);
            }
        }
        if !in_validation {
            return Err(Error::Format("missing 'validation' section marker".into()));
        }
        Ok(SplitSpec { train_indices, validation_indices, seed })
    }
}

/// Split labels into train/validation sides with per-class proportions
/// preserved. Each class contributes `round(count * fraction)` validation
/// rows, clamped so both sides keep at least one row per class. The result
/// depends only on `(labels, fraction, seed)`.
pub fn stratified_split_labels(labels: &[u8], fraction: f64, seed: u64) -> Result<SplitSpec> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("validation fraction {fraction} not in (0, 1)")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_CLASSES];
    for (i, &l) in labels.iter().enumerate() {
        if l as usize >= NUM_CLASSES {
            return Err(Error::Format(format!("label {l} out of range at row {i}")));
        }
        by_class[l as usize].push(i);
    }
    for (c, rows) in by_class.iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::Config(format!(
                "class {c} has {} sample(s); stratified split needs at least 2 per class",
                rows.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_indices = Vec::new();
    let mut validation_indices = Vec::new();
    for rows in &mut by_class {
        let n_c = rows.len();
        let want = (n_c as f64 * fraction).round() as usize;
        let v_c = want.clamp(1, n_c - 1);
        rows.shuffle(&mut rng);
        validation_indices.extend_from_slice(&rows[..v_c]);
        train_indices.extend_from_slice(&rows[v_c..]);
    }
    train_indices.sort_unstable();
    validation_indices.sort_unstable();
    Ok(SplitSpec { train_indices, validation_indices, seed })
}

/// [`stratified_split_labels`] applied to a dataset's labels.
pub fn stratified_split(ds: &Dataset, fraction: f64, seed: u64) -> Result<SplitSpec> {
    stratified_split_labels(&ds.labels, fraction, seed)
}
