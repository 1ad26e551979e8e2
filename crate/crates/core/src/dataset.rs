//! Labeled datasets: CSV and IDX loaders, CSV writer, and seeded culling.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::rng;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Feature matrix (samples x features) with one dense class id per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    /// Original label strings; index is the internal class id.
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
}

impl LabeledDataset {
    /// Builds a dataset from raw string labels, re-indexing them densely in
    /// order of first appearance.
    pub fn from_named_labels<S: AsRef<str>>(
        features: Array2<f64>,
        raw_labels: &[S],
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != raw_labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows vs {} labels",
                features.nrows(),
                raw_labels.len()
            )));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut class_names = Vec::new();
        let labels = raw_labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                *index.entry(l).or_insert_with(|| {
                    class_names.push(l.to_string());
                    class_names.len() - 1
                })
            })
            .collect();
        let ds = LabeledDataset {
            features,
            labels,
            class_names,
            feature_names,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn num_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Structural checks shared by every constructor.
    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.features.dim();
        if m == 0 || n == 0 {
            return Err(Error::EmptyDataset);
        }
        if self.labels.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "{m} feature rows vs {} labels",
                self.labels.len()
            )));
        }
        if self.feature_names.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{n} feature columns vs {} names",
                self.feature_names.len()
            )));
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.class_names.len()) {
            return Err(Error::ShapeMismatch(format!(
                "label {bad} out of range for {} classes",
                self.class_names.len()
            )));
        }
        for ((row, col), v) in self.features.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row: row + 1,
                    column: self.feature_names[col].clone(),
                });
            }
        }
        Ok(())
    }

    /// Keeps the listed rows (in the given order) and the listed classes,
    /// re-indexing labels by position in `classes`.
    fn subset(&self, rows: &[usize], classes: &[usize]) -> LabeledDataset {
        let mut remap = vec![usize::MAX; self.num_classes()];
        for (new, &old) in classes.iter().enumerate() {
            remap[old] = new;
        }
        LabeledDataset {
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&r| remap[self.labels[r]]).collect(),
            class_names: classes.iter().map(|&c| self.class_names[c].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Reads a headed, comma-separated file. Every column except
/// `label_column` must hold finite decimal numbers.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column)
}

pub fn read_csv<R: std::io::Read>(reader: R, label_column: &str) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let n = feature_names.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let cell = cell.trim();
            let v: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                row,
                column: header[i].to_string(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row,
                    column: header[i].to_string(),
                });
            }
            values.push(v);
        }
    }
    let m = raw_labels.len();
    if m == 0 {
        return Err(Error::EmptyDataset);
    }
    let features = Array2::from_shape_vec((m, n), values).expect("row lengths checked above");
    LabeledDataset::from_named_labels(features, &raw_labels, feature_names)
}

/// Writes features in shortest round-trip decimal form with the label column
/// last, so that `load_csv` reproduces the dataset exactly.
pub fn write_csv(ds: &LabeledDataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(ds, file, label_column)
}

pub fn write_csv_to<W: std::io::Write>(
    ds: &LabeledDataset,
    writer: W,
    label_column: &str,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.push(label_column);
    w.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for (row, &label) in ds.features.rows().into_iter().zip(&ds.labels) {
        record.clear();
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(ds.class_names[label].clone());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Loads an uncompressed IDX image/label pair (MNIST layout). Pixels are
/// converted to reals without rescaling.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let images = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    parse_idx(&images, &labels)
}

fn be_u32(bytes: &[u8], at: usize, what: &'static str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::TruncatedFile {
            what,
            needed: at + 4,
            have: bytes.len(),
        })
}

pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<LabeledDataset> {
    let magic = be_u32(images, 0, "images")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            what: "images",
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(images, 4, "images")? as usize;
    let rows = be_u32(images, 8, "images")? as usize;
    let cols = be_u32(images, 12, "images")? as usize;

    let magic = be_u32(labels, 0, "labels")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            what: "labels",
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let label_count = be_u32(labels, 4, "labels")? as usize;
    if label_count != count {
        return Err(Error::CountMismatch {
            images: count,
            labels: label_count,
        });
    }
    if count == 0 {
        return Err(Error::EmptyDataset);
    }

    let pixels = rows * cols;
    let needed = 16 + count * pixels;
    if images.len() < needed {
        return Err(Error::TruncatedFile {
            what: "images",
            needed,
            have: images.len(),
        });
    }
    if labels.len() < 8 + count {
        return Err(Error::TruncatedFile {
            what: "labels",
            needed: 8 + count,
            have: labels.len(),
        });
    }

    let values: Vec<f64> = images[16..needed].iter().map(|&b| f64::from(b)).collect();
    let features = Array2::from_shape_vec((count, pixels), values).expect("length checked");
    let raw: Vec<String> = labels[8..8 + count].iter().map(|b| b.to_string()).collect();
    let names = (0..pixels).map(|i| format!("px{i}")).collect();
    LabeledDataset::from_named_labels(features, &raw, names)
}

/// Parameters of a seeded culled variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CullSpec {
    pub num_classes: usize,
    /// Fraction of each selected class to keep, in (0, 1].
    pub subsample_fraction: f64,
    pub seed: u64,
}

impl CullSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig(format!(
                "culling needs at least 2 classes, got {}",
                self.num_classes
            )));
        }
        if !(self.subsample_fraction > 0.0 && self.subsample_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "subsample fraction must lie in (0, 1], got {}",
                self.subsample_fraction
            )));
        }
        Ok(())
    }
}

/// Number of samples kept from a class of `count` samples.
pub fn kept_per_class(count: usize, fraction: f64) -> usize {
    // 0.1 * 30 evaluates to 3.0000000000000004; don't let that round up.
    let exact = fraction * count as f64;
    ((exact - 1e-9).ceil().max(0.0) as usize).min(count)
}

/// Random class selection without replacement followed by per-class
/// subsampling. Selected classes keep their original relative order and
/// retained samples keep dataset order.
pub fn cull(ds: &LabeledDataset, spec: &CullSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let n_c = ds.num_classes();
    if spec.num_classes > n_c {
        return Err(Error::TooManyClassesRequested {
            requested: spec.num_classes,
            available: n_c,
        });
    }
    let mut rng = rng::prng(spec.seed);

    let mut classes: Vec<usize> = (0..n_c).collect();
    rng::partial_shuffle(&mut classes, spec.num_classes, &mut rng);
    let mut selected = classes[..spec.num_classes].to_vec();
    selected.sort_unstable();

    let mut kept = Vec::new();
    for &c in &selected {
        let mut members: Vec<usize> = (0..ds.num_samples()).filter(|&i| ds.labels[i] == c).collect();
        let take = kept_per_class(members.len(), spec.subsample_fraction);
        if take == 0 {
            return Err(Error::EmptyAfterCull(ds.class_names[c].clone()));
        }
        rng::partial_shuffle(&mut members, take, &mut rng);
        kept.extend_from_slice(&members[..take]);
    }
    kept.sort_unstable();
    Ok(ds.subset(&kept, &selected))
}
