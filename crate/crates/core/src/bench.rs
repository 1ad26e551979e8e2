//! kNN cross-validation over 2-D embeddings, with a PCA baseline.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::layout;
use crate::pipeline::EmbedConfig;
use crate::render::fmt_sig;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Sprev,
    Pca2d,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sprev => "sprev",
            Method::Pca2d => "pca",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sprev" => Ok(Method::Sprev),
            "pca" | "pca2d" => Ok(Method::Pca2d),
            other => Err(Error::InvalidConfig(format!(
                "unknown method `{other}` (expected sprev or pca)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub k_values: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            k_values: vec![3, 5, 15, 30, 60],
            folds: 10,
            seed: 42,
            methods: vec![Method::Sprev, Method::Pca2d],
        }
    }
}

impl BenchSpec {
    pub fn validate(&self, num_samples: usize) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.k_values.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidConfig("need at least one k and one method".into()));
        }
        let train = (self.folds - 1) as f64 / self.folds as f64 * num_samples as f64;
        for &k in &self.k_values {
            if k == 0 || k as f64 >= train {
                return Err(Error::KTooLarge {
                    k,
                    available: train.ceil() as usize - 1,
                });
            }
        }
        Ok(())
    }
}

/// Accuracy of one (method, k) cell across folds.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub method: Method,
    pub k: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Population standard deviation over folds.
    pub std_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub cells: Vec<CellResult>,
    /// Wall-clock time of computing each method's embedding.
    pub embed_time: Vec<(Method, Duration)>,
}

impl BenchResult {
    pub fn cell(&self, method: Method, k: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.method == method && c.k == k)
    }

    pub fn embed_seconds(&self, method: Method) -> Option<f64> {
        self.embed_time
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, d)| d.as_secs_f64())
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fold index for every sample. Within each class samples are shuffled and
/// dealt round-robin; the dealing position carries over between classes so
/// fold sizes differ by at most one.
pub fn stratified_folds(
    labels: &[usize],
    class_names: &[String],
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("folds must be at least 2, got {folds}")));
    }
    let n_c = class_names.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_c];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    for (c, m) in members.iter().enumerate() {
        if m.len() < folds {
            return Err(Error::ClassSmallerThanFolds {
                class: class_names[c].clone(),
                count: m.len(),
                folds,
            });
        }
    }
    let mut rng = rng::prng(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for m in &mut members {
        rng::shuffle(m, &mut rng);
        for &i in m.iter() {
            assignment[i] = next;
            next = (next + 1) % folds;
        }
    }
    Ok(assignment)
}

/// A training sample of the 2-D classifier. `id` is the sample's index in
/// the source dataset and breaks distance ties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub xy: [f64; 2],
    pub label: usize,
    pub id: usize,
}

/// Majority vote among the `k` nearest points. Distance ties go to the lower
/// `id`; vote ties go to the smaller summed distance, then the lower class.
pub fn knn_predict(train: &[LabeledPoint], query: [f64; 2], k: usize) -> Result<usize> {
    if k == 0 || k > train.len() {
        return Err(Error::KTooLarge {
            k,
            available: train.len(),
        });
    }
    let mut dists: Vec<(f64, usize, usize)> = train
        .iter()
        .map(|p| {
            let d = (p.xy[0] - query[0]).hypot(p.xy[1] - query[1]);
            (d, p.id, p.label)
        })
        .collect();
    let by_key = |a: &(f64, usize, usize), b: &(f64, usize, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dists.len() {
        dists.select_nth_unstable_by(k - 1, by_key);
        dists.truncate(k);
    }
    dists.sort_unstable_by(by_key);

    let num_classes = dists.iter().map(|d| d.2).max().unwrap_or(0) + 1;
    let mut votes = vec![(0usize, 0.0f64); num_classes];
    for &(d, _, label) in &dists {
        votes[label].0 += 1;
        votes[label].1 += d;
    }
    let best = votes
        .iter()
        .enumerate()
        .filter(|(_, v)| v.0 > 0)
        .min_by(|(ca, a), (cb, b)| {
            b.0.cmp(&a.0)
                .then(a.1.total_cmp(&b.1))
                .then(ca.cmp(cb))
        })
        .map(|(c, _)| c)
        .expect("k >= 1 neighbours");
    Ok(best)
}

const PCA_TOLERANCE: f64 = 1e-10;
const PCA_MAX_ITERATIONS: usize = 1000;

/// Dominant eigenpair of a symmetric matrix by power iteration.
fn power_iteration(cov: &Array2<f64>, start: Array1<f64>) -> Result<(f64, Array1<f64>)> {
    let mut v = &start / start.dot(&start).sqrt();
    for _ in 0..PCA_MAX_ITERATIONS {
        let w = cov.dot(&v);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return Ok((0.0, v));
        }
        let next = w / norm;
        let diff = (&next - &v).mapv(f64::abs).sum().min((&next + &v).mapv(f64::abs).sum());
        v = next;
        if diff < PCA_TOLERANCE {
            let lambda = v.dot(&cov.dot(&v));
            return Ok((lambda, v));
        }
    }
    Err(Error::ConvergenceFailure(PCA_MAX_ITERATIONS))
}

/// Flips `v` so its largest-magnitude component is positive.
pub fn normalize_sign(v: &mut Array1<f64>) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.mapv_inplace(|x| -x);
    }
}

/// Projection onto the top two principal axes, via power iteration with
/// deflation on the sample covariance. Degenerate input (no variance)
/// yields an all-zero projection.
pub fn pca2d(features: &Array2<f64>, seed: u64) -> Result<Array2<f64>> {
    let (m, n) = features.dim();
    if m < 2 {
        return Err(Error::InvalidConfig(format!("pca needs at least 2 samples, got {m}")));
    }
    let mean = features.mean_axis(Axis(0)).expect("m >= 2");
    let centered = features - &mean;
    let mut cov = centered.t().dot(&centered) / (m - 1) as f64;

    let total_var: f64 = cov.diag().sum();
    let mut out = Array2::zeros((m, 2));
    if !(total_var > 0.0) {
        log::warn!("pca input has no variance; returning a zero projection");
        return Ok(out);
    }
    let floor = total_var * 1e-14;
    let mut rng = rng::prng(seed);
    for axis in 0..2.min(n) {
        let remaining: f64 = cov.diag().sum();
        if remaining <= floor {
            break;
        }
        let start = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0) + 1e-3);
        let (lambda, mut v) = power_iteration(&cov, start)?;
        if lambda <= floor {
            break;
        }
        normalize_sign(&mut v);
        out.column_mut(axis).assign(&centered.dot(&v));
        let outer = v
            .view()
            .insert_axis(Axis(1))
            .dot(&v.view().insert_axis(Axis(0)));
        cov = cov - outer * lambda;
    }
    Ok(out)
}

fn embed_points(ds: &LabeledDataset, cfg: &EmbedConfig, method: Method) -> Result<Array2<f64>> {
    match method {
        Method::Sprev => Ok(layout::embed(ds, cfg)?.points),
        Method::Pca2d => pca2d(&ds.features, cfg.seed),
    }
}

fn fold_accuracy(points: &Array2<f64>, labels: &[usize], folds: &[usize], fold: usize, k: usize) -> Result<f64> {
    let train: Vec<LabeledPoint> = (0..labels.len())
        .filter(|&i| folds[i] != fold)
        .map(|i| LabeledPoint {
            xy: [points[[i, 0]], points[[i, 1]]],
            label: labels[i],
            id: i,
        })
        .collect();
    let mut total = 0usize;
    let mut correct = 0usize;
    for i in (0..labels.len()).filter(|&i| folds[i] == fold) {
        let pred = knn_predict(&train, [points[[i, 0]], points[[i, 1]]], k)?;
        total += 1;
        if pred == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / total as f64)
}

/// Embeds the whole dataset once per method, then scores a kNN classifier
/// with stratified cross-validation inside each embedding.
pub fn run_bench(ds: &LabeledDataset, cfg: &EmbedConfig, spec: &BenchSpec) -> Result<BenchResult> {
    spec.validate(ds.num_samples())?;
    let folds = stratified_folds(&ds.labels, &ds.class_names, spec.folds, spec.seed)?;

    let mut cells = Vec::new();
    let mut embed_time = Vec::new();
    for &method in &spec.methods {
        let start = Instant::now();
        let points = embed_points(ds, cfg, method)?;
        embed_time.push((method, start.elapsed()));

        for &k in &spec.k_values {
            let fold_accuracies = (0..spec.folds)
                .into_par_iter()
                .map(|f| fold_accuracy(&points, &ds.labels, &folds, f, k))
                .collect::<Result<Vec<f64>>>()?;
            let (mean_accuracy, std_accuracy) = mean_std(&fold_accuracies);
            cells.push(CellResult {
                method,
                k,
                fold_accuracies,
                mean_accuracy,
                std_accuracy,
            });
        }
    }
    Ok(BenchResult { cells, embed_time })
}

/// `method,k,fold,accuracy`, one row per fold.
pub fn write_fold_csv<W: Write>(result: &BenchResult, mut w: W) -> std::io::Result<()> {
    writeln!(w, "method,k,fold,accuracy")?;
    for cell in &result.cells {
        for (fold, acc) in cell.fold_accuracies.iter().enumerate() {
            writeln!(w, "{},{},{},{}", cell.method, cell.k, fold, fmt_sig(*acc))?;
        }
    }
    Ok(())
}

/// `method,k,mean,std,embed_seconds`. Timing is only written when
/// `with_timing` is set; otherwise the column is left empty so the file is
/// reproducible byte for byte.
pub fn write_summary_csv<W: Write>(result: &BenchResult, with_timing: bool, mut w: W) -> std::io::Result<()> {
    writeln!(w, "method,k,mean,std,embed_seconds")?;
    for cell in &result.cells {
        let secs = match (with_timing, result.embed_seconds(cell.method)) {
            (true, Some(s)) => fmt_sig(s),
            _ => String::new(),
        };
        writeln!(
            w,
            "{},{},{},{},{}",
            cell.method,
            cell.k,
            fmt_sig(cell.mean_accuracy),
            fmt_sig(cell.std_accuracy),
            secs
        )?;
    }
    Ok(())
}
