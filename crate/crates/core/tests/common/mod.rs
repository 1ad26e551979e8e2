//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's numeric code.

// Index loops are kept so the oracles read like the textbook formulas.
#![allow(dead_code, clippy::needless_range_loop)]

use ndarray::Array2;
use rand::Rng;
use sprev::dataset::LabeledDataset;
use sprev::rng::Prng;

/// Uniform random features with a per-class offset; every class is present.
pub fn random_dataset(rng: &mut Prng, m_max: usize, n_max: usize, nc_max: usize) -> LabeledDataset {
    let n_c = rng.random_range(2..=nc_max);
    let m = rng.random_range(n_c.max(3)..=m_max);
    let n = rng.random_range(2..=n_max);
    let labels: Vec<String> = (0..m)
        .map(|i| if i < n_c { i } else { rng.random_range(0..n_c) })
        .map(|c| format!("c{c}"))
        .collect();
    let offsets: Vec<Vec<f64>> = (0..n_c).map(|_| (0..n).map(|_| rng.random_range(0.0..2.0)).collect()).collect();
    let features = Array2::from_shape_fn((m, n), |(i, j)| {
        let c: usize = labels[i][1..].parse().unwrap();
        offsets[c][j] + rng.random_range(-1.0..1.0)
    });
    let names = (0..n).map(|j| format!("f{j}")).collect();
    LabeledDataset::from_named_labels(features, &labels, names).unwrap()
}

/// Straight-loop embedding with inverse-distance weights and Euclidean
/// distance, written directly from the definition.
pub fn naive_embed(x: &[Vec<f64>], labels: &[usize], n_c: usize, eps: f64) -> Vec<[f64; 2]> {
    let m = x.len();
    let n = x[0].len();

    let mut s = vec![vec![0.0; n]; m];
    for j in 0..n {
        let mut lo = x[0][j];
        let mut hi = x[0][j];
        for i in 0..m {
            if x[i][j] < lo {
                lo = x[i][j];
            }
            if x[i][j] > hi {
                hi = x[i][j];
            }
        }
        for i in 0..m {
            s[i][j] = if hi > lo { (x[i][j] - lo) / (hi - lo) } else { 0.0 };
        }
    }

    let mut cent = vec![vec![0.0; n]; n_c];
    let mut count = vec![0.0; n_c];
    for i in 0..m {
        count[labels[i]] += 1.0;
        for j in 0..n {
            cent[labels[i]][j] += s[i][j];
        }
    }
    let r = (n as f64).sqrt() / 2.0;
    let mut anchor = vec![vec![0.0; n]; n_c];
    for c in 0..n_c {
        let mut norm = 0.0;
        for j in 0..n {
            cent[c][j] /= count[c];
            norm += (cent[c][j] - 0.5) * (cent[c][j] - 0.5);
        }
        norm = norm.sqrt();
        for j in 0..n {
            anchor[c][j] = 0.5 + r * (cent[c][j] - 0.5) / norm;
        }
    }

    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut w = vec![0.0; n_c];
        let mut total = 0.0;
        for c in 0..n_c {
            let mut d = 0.0;
            for j in 0..n {
                d += (s[i][j] - anchor[c][j]) * (s[i][j] - anchor[c][j]);
            }
            w[c] = 1.0 / (d.sqrt() + eps);
            total += w[c];
        }
        let mut p = [0.0, 0.0];
        for c in 0..n_c {
            let theta = 2.0 * std::f64::consts::PI * c as f64 / n_c as f64;
            p[0] += w[c] / total * theta.cos();
            p[1] += w[c] / total * theta.sin();
        }
        out.push(p);
    }
    out
}

/// Cyclic Jacobi eigensolver for a symmetric matrix. Returns eigenvalues in
/// descending order with eigenvectors as columns of the second value.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for i in 0..n {
        v[i][i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|k| order.iter().map(|&i| v[k][i]).collect()).collect();
    (values, vectors)
}

/// Scores on the top two covariance eigenvectors, each flipped so its
/// largest-magnitude component is positive. Axes with negligible variance
/// score zero.
pub fn reference_pca2d(x: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let m = x.len();
    let n = x[0].len();
    let mut mean = vec![0.0; n];
    for row in x {
        for j in 0..n {
            mean[j] += row[j] / m as f64;
        }
    }
    let centered: Vec<Vec<f64>> = x.iter().map(|r| (0..n).map(|j| r[j] - mean[j]).collect()).collect();
    let mut cov = vec![vec![0.0; n]; n];
    for r in &centered {
        for a in 0..n {
            for b in 0..n {
                cov[a][b] += r[a] * r[b] / (m - 1) as f64;
            }
        }
    }
    let total: f64 = (0..n).map(|i| cov[i][i]).sum();
    let (values, vectors) = jacobi_eigen(&cov);
    let mut out = vec![[0.0; 2]; m];
    for axis in 0..2.min(n) {
        if values[axis] <= 1e-14 * total {
            continue;
        }
        let mut e: Vec<f64> = (0..n).map(|k| vectors[k][axis]).collect();
        let mut big = 0;
        for k in 0..n {
            if e[k].abs() > e[big].abs() {
                big = k;
            }
        }
        if e[big] < 0.0 {
            e.iter_mut().for_each(|v| *v = -*v);
        }
        for i in 0..m {
            out[i][axis] = (0..n).map(|k| centered[i][k] * e[k]).sum();
        }
    }
    out
}

pub fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Reads the bundled 5000-sample MNIST extract.
pub fn mnist5k() -> LabeledDataset {
    use std::io::Read;
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let gunzip = |name: &str| {
        let file = std::fs::File::open(dir.join(name)).unwrap();
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(file).read_to_end(&mut out).unwrap();
        out
    };
    sprev::dataset::parse_idx(
        &gunzip("mnist5k-images-idx3-ubyte.gz"),
        &gunzip("mnist5k-labels-idx1-ubyte.gz"),
    )
    .unwrap()
}
