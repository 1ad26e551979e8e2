//! Scaling, class centroids, hypersphere anchors, the similarity matrix and
//! the distance-to-weight kernels.
//!
//! After per-feature min-max scaling every sample lies in the unit
//! hypercube, whose circumscribing sphere has center `(0.5, ..., 0.5)` and
//! radius `sqrt(n) / 2`. Each class gets one anchor on that sphere: the point
//! where the ray from the center through the class centroid leaves the
//! sphere. Samples are then described by their distances to the anchors.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::metric::{self, MetricKind};

/// Features mapped into `[0, 1]` column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledDataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    /// `(min, max)` of each source column.
    pub ranges: Vec<(f64, f64)>,
}

impl ScaledDataset {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBall {
    pub center: Array1<f64>,
    pub radius: f64,
}

impl BoundingBall {
    /// Sphere circumscribing the unit `n`-cube.
    pub fn unit_cube(n: usize) -> Self {
        BoundingBall {
            center: Array1::from_elem(n, 0.5),
            radius: (n as f64).sqrt() / 2.0,
        }
    }
}

/// One anchor per class on the bounding sphere, rows in class-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceAnchors {
    pub anchors: Array2<f64>,
    pub ball: BoundingBall,
}

/// Distances from every sample (rows) to every class anchor (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub values: Array2<f64>,
    pub metric: MetricKind,
}

/// Transform from an anchor-distance row to a convex weight row.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum WeightKernel {
    /// `w_c ∝ 1 / (d_c + epsilon)`.
    #[default]
    InverseDistance,
    /// `w_c ∝ exp(-d_c / temperature)`.
    SoftmaxNegDistance { temperature: f64 },
}

impl fmt::Display for WeightKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKernel::InverseDistance => f.write_str("inverse"),
            WeightKernel::SoftmaxNegDistance { .. } => f.write_str("softmax"),
        }
    }
}

/// Parses the kernel name; softmax starts at temperature 1.
impl FromStr for WeightKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse" => Ok(WeightKernel::InverseDistance),
            "softmax" => Ok(WeightKernel::SoftmaxNegDistance { temperature: 1.0 }),
            other => Err(Error::UnsupportedKernel(other.to_string())),
        }
    }
}

pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedConfig {
    pub metric: MetricKind,
    pub kernel: WeightKernel,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            metric: MetricKind::Euclidean,
            kernel: WeightKernel::InverseDistance,
            epsilon: DEFAULT_EPSILON,
            seed: 42,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if let WeightKernel::SoftmaxNegDistance { temperature } = self.kernel {
            if !(temperature > 0.0 && temperature.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "softmax temperature must be positive, got {temperature}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-feature min-max scaling. Constant columns map to 0.
pub fn min_max_scale(ds: &LabeledDataset) -> ScaledDataset {
    let mut features = ds.features.clone();
    let mut ranges = Vec::with_capacity(ds.num_features());
    let mut constant = Vec::new();
    for (j, mut col) in features.axis_iter_mut(Axis(1)).enumerate() {
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        ranges.push((lo, hi));
        if hi > lo {
            let span = hi - lo;
            col.mapv_inplace(|v| ((v - lo) / span).clamp(0.0, 1.0));
        } else {
            constant.push(j);
            col.fill(0.0);
        }
    }
    if !constant.is_empty() {
        let names: Vec<&str> = constant.iter().map(|&j| ds.feature_names[j].as_str()).collect();
        log::warn!(
            "{} constant feature column(s) scaled to 0: {}",
            names.len(),
            names.join(", ")
        );
    }
    ScaledDataset {
        features,
        labels: ds.labels.clone(),
        class_names: ds.class_names.clone(),
        ranges,
    }
}

/// Mean feature vector of each class, rows in class-id order.
pub fn class_centroids(ds: &ScaledDataset) -> Result<Array2<f64>> {
    let n_c = ds.num_classes();
    let mut sums = Array2::<f64>::zeros((n_c, ds.features.ncols()));
    let mut counts = vec![0usize; n_c];
    for (row, &label) in ds.features.rows().into_iter().zip(&ds.labels) {
        let mut acc = sums.row_mut(label);
        acc += &row;
        counts[label] += 1;
    }
    for (c, (mut row, &count)) in sums.rows_mut().into_iter().zip(&counts).enumerate() {
        if count == 0 {
            return Err(Error::EmptyClass(ds.class_names[c].clone()));
        }
        row /= count as f64;
    }
    Ok(sums)
}

/// Projects each centroid radially onto the sphere circumscribing the unit
/// `n`-cube.
pub fn surface_anchors(centroids: &Array2<f64>, class_names: &[String]) -> Result<SurfaceAnchors> {
    let n = centroids.ncols();
    let ball = BoundingBall::unit_cube(n);
    let mut anchors = Array2::<f64>::zeros(centroids.raw_dim());
    for (c, (centroid, mut anchor)) in centroids.rows().into_iter().zip(anchors.rows_mut()).enumerate() {
        let dir = &centroid - &ball.center;
        let norm = dir.dot(&dir).sqrt();
        if !(norm > 1e-12) {
            let name = class_names.get(c).cloned().unwrap_or_else(|| c.to_string());
            return Err(Error::CentroidAtCenter(name));
        }
        anchor.assign(&(&ball.center + &(dir * (ball.radius / norm))));
    }
    Ok(SurfaceAnchors { anchors, ball })
}

fn as_slice<'a>(v: &'a ArrayView1<'a, f64>, buf: &'a mut Vec<f64>) -> &'a [f64] {
    match v.as_slice() {
        Some(s) => s,
        None => {
            buf.clear();
            buf.extend(v.iter().copied());
            buf
        }
    }
}

/// Row-parallel; each row depends only on its own sample.
pub fn similarity_matrix(
    ds: &ScaledDataset,
    anchors: &SurfaceAnchors,
    metric: MetricKind,
) -> Result<SimilarityMatrix> {
    if anchors.anchors.ncols() != ds.features.ncols() {
        return Err(Error::DimensionMismatch {
            left: ds.features.ncols(),
            right: anchors.anchors.ncols(),
        });
    }
    let m = ds.features.nrows();
    let n_c = anchors.anchors.nrows();
    let anchor_rows: Vec<Vec<f64>> = anchors.anchors.rows().into_iter().map(|r| r.to_vec()).collect();

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let row = ds.features.row(i);
            let mut buf = Vec::new();
            let x = as_slice(&row, &mut buf);
            anchor_rows
                .iter()
                .map(|a| match metric {
                    MetricKind::Euclidean => Ok(metric::euclidean(x, a)),
                    _ => metric::dist(metric, x, a),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(SimilarityMatrix {
        values: Array2::from_shape_vec((m, n_c), flat).expect("rows have n_c entries"),
        metric,
    })
}

/// Converts one row of anchor distances into convex weights.
pub fn weight_row(distances: &[f64], kernel: WeightKernel, epsilon: f64) -> Vec<f64> {
    let mut w: Vec<f64> = match kernel {
        WeightKernel::InverseDistance => {
            let shifted: Vec<f64> = distances.iter().map(|&d| d + epsilon).collect();
            if shifted.contains(&0.0) {
                // epsilon = 0 and an exact anchor hit: the limit puts all
                // mass on the zero-distance anchors.
                shifted.iter().map(|&d| if d == 0.0 { 1.0 } else { 0.0 }).collect()
            } else {
                shifted.iter().map(|&d| 1.0 / d).collect()
            }
        }
        WeightKernel::SoftmaxNegDistance { temperature } => {
            let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
            distances.iter().map(|&d| (-(d - min) / temperature).exp()).collect()
        }
    };
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

pub fn weight_rows(sim: &SimilarityMatrix, cfg: &EmbedConfig) -> Array2<f64> {
    let (m, n_c) = sim.values.dim();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| weight_row(&sim.values.row(i).to_vec(), cfg.kernel, cfg.epsilon))
        .collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((m, n_c), flat).expect("rows have n_c entries")
}
