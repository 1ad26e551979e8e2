//! Regular polygon layout and the end-to-end embedding.

use std::f64::consts::PI;

use ndarray::Array2;
use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::pipeline::{self, EmbedConfig};

/// Row sums of a convex weight row must be within this of 1.
pub const CONVEX_ROW_TOLERANCE: f64 = 1e-12;

/// `num` evenly spaced values from `start` to `stop`, both endpoints exact.
pub fn lin_space(start: f64, stop: f64, num: usize) -> Result<Vec<f64>> {
    if num < 2 {
        return Err(Error::NumTooSmall(num));
    }
    let step = (stop - start) / (num - 1) as f64;
    let mut out: Vec<f64> = (0..num).map(|i| start + i as f64 * step).collect();
    out[num - 1] = stop;
    Ok(out)
}

/// Regular polygon inscribed in the unit circle. Vertex `c` sits at angle
/// `2πc / n_c`, counterclockwise from `(1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Array2<f64>,
}

impl Polygon {
    pub fn num_vertices(&self) -> usize {
        self.vertices.nrows()
    }

    pub fn vertex(&self, c: usize) -> [f64; 2] {
        [self.vertices[[c, 0]], self.vertices[[c, 1]]]
    }

    /// Smallest signed cross product of `p` against the directed edges.
    /// Non-negative iff `p` is inside or on the polygon. For a digon the
    /// second value measures how far `p` strays along the segment.
    pub fn containment_margin(&self, p: [f64; 2]) -> f64 {
        let n = self.num_vertices();
        if n == 2 {
            let [ax, ay] = self.vertex(0);
            let [bx, by] = self.vertex(1);
            let off_line = ((bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax)).abs();
            let t = (p[0] - ax) * (bx - ax) + (p[1] - ay) * (by - ay);
            let len2 = (bx - ax).powi(2) + (by - ay).powi(2);
            return (-off_line).min(t).min(len2 - t);
        }
        (0..n)
            .map(|i| {
                let [ax, ay] = self.vertex(i);
                let [bx, by] = self.vertex((i + 1) % n);
                (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        let n = self.num_vertices();
        (0..n)
            .map(|i| {
                let [ax, ay] = self.vertex(i);
                let [bx, by] = self.vertex((i + 1) % n);
                (bx - ax).hypot(by - ay)
            })
            .collect()
    }

    pub fn interior_angles(&self) -> Vec<f64> {
        let n = self.num_vertices();
        (0..n)
            .map(|i| {
                let [px, py] = self.vertex((i + n - 1) % n);
                let [cx, cy] = self.vertex(i);
                let [nx, ny] = self.vertex((i + 1) % n);
                let (ux, uy) = (px - cx, py - cy);
                let (vx, vy) = (nx - cx, ny - cy);
                let cos = (ux * vx + uy * vy) / (ux.hypot(uy) * vx.hypot(vy));
                cos.clamp(-1.0, 1.0).acos()
            })
            .collect()
    }
}

pub fn make_polygon(n_c: usize) -> Result<Polygon> {
    if n_c < 2 {
        return Err(Error::TooFewClasses(n_c));
    }
    // One angle per class; lin_space over [0, 2π] with n_c + 1 points would
    // repeat the first vertex as the last.
    let angles = lin_space(0.0, 2.0 * PI, n_c + 1)?;
    let mut vertices = Array2::zeros((n_c, 2));
    for (c, &theta) in angles[..n_c].iter().enumerate() {
        let (s, co) = exact_unit_angle(c, n_c, theta);
        vertices[[c, 0]] = co;
        vertices[[c, 1]] = s;
    }
    Ok(Polygon { vertices })
}

/// `(sin, cos)` with the quarter-turn angles snapped to exact values so that
/// axis-aligned vertices have exact zero coordinates.
fn exact_unit_angle(c: usize, n_c: usize, theta: f64) -> (f64, f64) {
    if (4 * c).is_multiple_of(n_c) {
        match 4 * c / n_c {
            0 => return (0.0, 1.0),
            1 => return (1.0, 0.0),
            2 => return (0.0, -1.0),
            3 => return (-1.0, 0.0),
            _ => {}
        }
    }
    theta.sin_cos()
}

/// `weights · vertices`; every row must be a convex weight vector.
pub fn convex_combination(weights: &Array2<f64>, polygon: &Polygon) -> Result<Array2<f64>> {
    if weights.ncols() != polygon.num_vertices() {
        return Err(Error::ShapeMismatch(format!(
            "{} weight columns vs {} polygon vertices",
            weights.ncols(),
            polygon.num_vertices()
        )));
    }
    for (i, row) in weights.rows().into_iter().enumerate() {
        let sum: f64 = row.sum();
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        if !((sum - 1.0).abs() <= CONVEX_ROW_TOLERANCE && min >= 0.0) {
            return Err(Error::NonConvexRow { row: i, sum, min });
        }
    }
    let m = weights.nrows();
    let points: Vec<[f64; 2]> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut p = [0.0; 2];
            for (w, v) in weights.row(i).iter().zip(polygon.vertices.rows()) {
                p[0] += w * v[0];
                p[1] += w * v[1];
            }
            p
        })
        .collect();
    Ok(Array2::from_shape_fn((m, 2), |(i, k)| points[i][k]))
}

/// The finished 2-D layout: one point per sample inside the class polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding2D {
    pub points: Array2<f64>,
    pub polygon: Polygon,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl Embedding2D {
    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.points[[i, 0]], self.points[[i, 1]]]
    }
}

/// scale → centroids → anchors → similarity → weights → polygon combination.
pub fn embed(ds: &LabeledDataset, cfg: &EmbedConfig) -> Result<Embedding2D> {
    cfg.validate()?;
    ds.validate()?;
    let n_c = ds.num_classes();
    if n_c < 2 {
        return Err(Error::TooFewClasses(n_c));
    }
    let scaled = pipeline::min_max_scale(ds);
    let centroids = pipeline::class_centroids(&scaled)?;
    let anchors = pipeline::surface_anchors(&centroids, &scaled.class_names)?;
    let sim = pipeline::similarity_matrix(&scaled, &anchors, cfg.metric)?;
    let weights = pipeline::weight_rows(&sim, cfg);
    let polygon = make_polygon(n_c)?;
    let points = convex_combination(&weights, &polygon)?;
    Ok(Embedding2D {
        points,
        polygon,
        labels: ds.labels.clone(),
        class_names: ds.class_names.clone(),
    })
}
