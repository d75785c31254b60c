//! Dense binary-classification datasets: CSV loading, seeded splits and shuffles.
//!
//! Every operation here returns new values; a [`Dataset`] is never mutated
//! after construction.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Binary class label, `+1` or `-1` on the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// The label as `+1.0` / `-1.0`.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    /// The label as a `{0, 1}` target for the cross-entropy loss.
    pub fn target(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => 0.0,
        }
    }

    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub features: Vec<f64>,
    pub label: Label,
}

impl Instance {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        Instance { features, label }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    feature_count: usize,
    instances: Vec<Instance>,
}

impl Dataset {
    /// Builds a dataset, checking that every instance has `feature_count`
    /// finite features.
    pub fn new(name: impl Into<String>, feature_count: usize, instances: Vec<Instance>) -> Result<Self> {
        if feature_count == 0 {
            return Err(Error::invalid("feature_count must be positive"));
        }
        for (i, inst) in instances.iter().enumerate() {
            if inst.features.len() != feature_count {
                return Err(Error::DimensionMismatch {
                    expected: feature_count,
                    got: inst.features.len(),
                });
            }
            if inst.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: i + 1,
                    message: "non-finite feature value".into(),
                });
            }
        }
        Ok(Dataset {
            name: name.into(),
            feature_count,
            instances,
        })
    }

    fn with_instances(&self, instances: Vec<Instance>) -> Dataset {
        Dataset {
            name: self.name.clone(),
            feature_count: self.feature_count,
            instances,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Instance> {
        self.instances.iter()
    }

    /// Count of positive-labelled instances.
    pub fn positives(&self) -> usize {
        self.instances
            .iter()
            .filter(|i| i.label == Label::Positive)
            .count()
    }

    /// New dataset holding the instances at `indices`, in that order.
    pub fn reorder(&self, indices: &[usize]) -> Dataset {
        self.with_instances(indices.iter().map(|&i| self.instances[i].clone()).collect())
    }

    /// Concatenates two datasets with the same feature count.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if other.feature_count != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                got: other.feature_count,
            });
        }
        let mut all = self.instances.clone();
        all.extend(other.instances.iter().cloned());
        Ok(self.with_instances(all))
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Instance;
    type IntoIter = std::slice::Iter<'a, Instance>;

    fn into_iter(self) -> Self::IntoIter {
        self.instances.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Delimiter {
    Comma,
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split(self, line: &str) -> Vec<&str> {
        match self {
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

/// Parses delimiter-separated numeric rows.
///
/// The delimiter (comma or whitespace) is detected from the first non-blank
/// line. Blank lines and lines starting with `#` are skipped. Row numbers in
/// errors are 1-based physical line numbers.
pub fn load_csv<R: BufRead>(
    source: R,
    name: &str,
    label_column: usize,
    positive_label: &str,
) -> Result<Dataset> {
    let mut delimiter = None;
    let mut feature_count = None;
    let mut instances = Vec::new();

    for (idx, line) in source.lines().enumerate() {
        let row = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| Delimiter::detect(trimmed));
        let fields = delim.split(trimmed);
        if label_column >= fields.len() {
            return Err(Error::Parse {
                row,
                message: format!(
                    "label column {label_column} missing ({} fields)",
                    fields.len()
                ),
            });
        }

        let mut features = Vec::with_capacity(fields.len() - 1);
        for (col, field) in fields.iter().enumerate() {
            if col == label_column {
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                message: format!("column {col}: `{field}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("column {col}: non-finite value `{field}`"),
                });
            }
            features.push(value);
        }

        match feature_count {
            None => feature_count = Some(features.len()),
            Some(m) if m != features.len() => {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {m} features, found {}", features.len()),
                })
            }
            _ => {}
        }

        let label = if fields[label_column] == positive_label {
            Label::Positive
        } else {
            Label::Negative
        };
        instances.push(Instance::new(features, label));
    }

    match feature_count {
        None => Err(Error::EmptyDataset),
        Some(0) => Err(Error::Parse {
            row: 1,
            message: "no feature columns".into(),
        }),
        Some(m) => Dataset::new(name, m, instances),
    }
}

/// Opens `path` and parses it with [`load_csv`].
pub fn load_csv_file(
    path: impl AsRef<Path>,
    name: &str,
    label_column: usize,
    positive_label: &str,
) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    load_csv(BufReader::new(file), name, label_column, positive_label)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeded uniformly random permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(seed));
    order
}

/// Returns a seeded random reordering of `d`.
pub fn shuffle(d: &Dataset, seed: u64) -> Dataset {
    d.reorder(&permutation(d.len(), seed))
}

/// Seeded random partition into `(train, test)` with exactly `train_count`
/// training instances. Both parts keep the shuffled order.
pub fn split_train_test(d: &Dataset, train_count: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if train_count == 0 || train_count >= d.len() {
        return Err(Error::invalid(format!(
            "train_count {train_count} must lie in (0, {})",
            d.len()
        )));
    }
    let order = permutation(d.len(), seed);
    let (head, tail) = order.split_at(train_count);
    Ok((d.reorder(head), d.reorder(tail)))
}

/// Like [`split_train_test`], but keeps the class ratio in both parts as close
/// as integer counts allow.
pub fn split_train_test_stratified(
    d: &Dataset,
    train_count: usize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if train_count == 0 || train_count >= d.len() {
        return Err(Error::invalid(format!(
            "train_count {train_count} must lie in (0, {})",
            d.len()
        )));
    }
    let order = permutation(d.len(), seed);
    let (pos, neg): (Vec<usize>, Vec<usize>) = order
        .iter()
        .partition(|&&i| d.instances[i].label == Label::Positive);
    let pos_train = ((pos.len() * train_count) as f64 / d.len() as f64).round() as usize;
    let pos_train = pos_train
        .min(pos.len())
        .max(train_count.saturating_sub(neg.len()));
    let neg_train = train_count - pos_train;

    let mut train: Vec<usize> = pos[..pos_train]
        .iter()
        .chain(&neg[..neg_train])
        .copied()
        .collect();
    let mut test: Vec<usize> = pos[pos_train..]
        .iter()
        .chain(&neg[neg_train..])
        .copied()
        .collect();
    // interleave the classes again
    let mut r = rng(seed ^ 0x5eed_5eed);
    train.shuffle(&mut r);
    test.shuffle(&mut r);
    Ok((d.reorder(&train), d.reorder(&test)))
}

/// Holds out `round(fraction * |train|)` instances for validation.
///
/// Returns `(remainder, validation)`.
pub fn validation_split(train: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "validation fraction {fraction} must lie in (0, 1)"
        )));
    }
    let held = (fraction * train.len() as f64).round() as usize;
    if held == 0 || held >= train.len() {
        return Err(Error::invalid(format!(
            "validation split of {} instances at fraction {fraction} leaves an empty part",
            train.len()
        )));
    }
    let order = permutation(train.len(), seed);
    let (val, rest) = order.split_at(held);
    Ok((train.reorder(rest), train.reorder(val)))
}

/// One dataset entry of the manifest file.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label_column: usize,
    pub positive_label: String,
    pub train_count: usize,
}

/// Dataset manifest: name → file, label encoding and train size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    base_dir: PathBuf,
    entries: BTreeMap<String, ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let entries: BTreeMap<String, ManifestEntry> =
            toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        Ok(Manifest {
            base_dir: base_dir.into(),
            entries,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entry(&self, name: &str) -> Option<&ManifestEntry> {
        self.entries.get(name)
    }

    /// Resolved path of the data file for `name`.
    pub fn data_path(&self, name: &str) -> Option<PathBuf> {
        self.entry(name).map(|e| self.base_dir.join(&e.path))
    }

    pub fn load(&self, name: &str) -> Result<Dataset> {
        let entry = self
            .entry(name)
            .ok_or_else(|| Error::invalid(format!("unknown dataset `{name}`")))?;
        let path = self.base_dir.join(&entry.path);
        let file = File::open(&path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        load_csv(
            BufReader::new(file),
            name,
            entry.label_column,
            &entry.positive_label,
        )
    }
}
