//! Monte Carlo study of near-orthogonality between random sign vectors.
//!
//! Vectors have components drawn independently from `{-1/√n, +1/√n}`, so
//! every vector has unit norm and the inner product of two of them is their
//! cosine. Signs are packed 64 per word; the inner product of two packed
//! vectors is `(n - 2·hamming) / n`.

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{self, Prng};

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoRunSpec {
    pub dims: Vec<usize>,
    pub num_pairs: usize,
    pub seed: u64,
}

impl OrthoRunSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidConfig("dims must not be empty".into()));
        }
        if self.dims.contains(&0) {
            return Err(Error::InvalidConfig("dimensions must be positive".into()));
        }
        if self.num_pairs == 0 {
            return Err(Error::InvalidConfig("pairs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Statistics of `|cos|` over the sampled pairs at one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoStats {
    pub n: usize,
    pub mean_abs_cos: f64,
    /// Population standard deviation of `|cos|`.
    pub std_abs_cos: f64,
    pub max_abs_cos: f64,
    /// Fraction of pairs with `|cos| >= ortho_epsilon(n)`.
    pub frac_exceeding_eps: f64,
    pub num_pairs: usize,
}

impl OrthoStats {
    pub fn std_error(&self) -> f64 {
        self.std_abs_cos / (self.num_pairs as f64).sqrt()
    }
}

/// Deviation threshold `sqrt(5 / sqrt(n))`.
pub fn ortho_epsilon(n: usize) -> f64 {
    (5.0 / (n as f64).sqrt()).sqrt()
}

/// Hoeffding bound on `P(|cos| >= ortho_epsilon(n))`: `2·exp(-√n / 2)`.
pub fn hoeffding_bound(n: usize) -> f64 {
    2.0 * (-(n as f64).sqrt() / 2.0).exp()
}

fn sample_signs(n: usize, rng: &mut Prng, out: &mut Vec<u64>) {
    let words = n.div_ceil(64);
    out.clear();
    out.extend((0..words).map(|_| rng.next_u64()));
    let rem = n % 64;
    if rem != 0 {
        *out.last_mut().expect("n >= 1") &= (1u64 << rem) - 1;
    }
}

/// Random vector with components `±1/√n`; bit `k` of the underlying draw
/// set means component `k` is positive.
pub fn random_unit_vector(n: usize, rng: &mut Prng) -> Vec<f64> {
    let mut bits = Vec::new();
    sample_signs(n, rng, &mut bits);
    let mag = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| if bits[k / 64] >> (k % 64) & 1 == 1 { mag } else { -mag })
        .collect()
}

fn packed_cos(n: usize, a: &[u64], b: &[u64]) -> f64 {
    let hamming: u32 = a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum();
    (n as f64 - 2.0 * f64::from(hamming)) / n as f64
}

fn run_dimension(n: usize, num_pairs: usize, mut rng: Prng) -> OrthoStats {
    let eps = ortho_epsilon(n);
    let (mut u, mut v) = (Vec::new(), Vec::new());
    let (mut sum, mut sum_sq, mut max) = (0.0f64, 0.0f64, 0.0f64);
    let mut exceed = 0usize;
    for _ in 0..num_pairs {
        sample_signs(n, &mut rng, &mut u);
        sample_signs(n, &mut rng, &mut v);
        let c = packed_cos(n, &u, &v).abs();
        sum += c;
        sum_sq += c * c;
        max = max.max(c);
        if c >= eps {
            exceed += 1;
        }
    }
    let count = num_pairs as f64;
    let mean = sum / count;
    let var = (sum_sq / count - mean * mean).max(0.0);
    OrthoStats {
        n,
        mean_abs_cos: mean,
        std_abs_cos: var.sqrt(),
        max_abs_cos: max,
        frac_exceeding_eps: exceed as f64 / count,
        num_pairs,
    }
}

/// One independent stream per entry of `spec.dims`, so results do not depend
/// on how dimensions are scheduled across threads.
pub fn run_ortho_sim(spec: &OrthoRunSpec) -> Result<Vec<OrthoStats>> {
    spec.validate()?;
    Ok(spec
        .dims
        .par_iter()
        .enumerate()
        .map(|(i, &n)| run_dimension(n, spec.num_pairs, rng::stream(spec.seed, i)))
        .collect())
}

pub fn default_dims() -> Vec<usize> {
    (0..=13).map(|p| 1usize << p).collect()
}

pub const DEFAULT_PAIRS: usize = 100_000;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vectors() {
        let v = random_unit_vector(1, &mut rng::prng(0));
        assert!(v == vec![1.0] || v == vec![-1.0]);
        for n in [1, 2, 3, 63, 64, 65, 1000] {
            let v = random_unit_vector(n, &mut rng::prng(n as u64));
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12, "n={n}");
        }
        assert_eq!(
            random_unit_vector(4, &mut rng::prng(9)),
            random_unit_vector(4, &mut rng::prng(9))
        );
    }

    #[test]
    fn packed_inner_product_matches_dense() {
        let mut rng = rng::prng(77);
        for n in [1, 5, 64, 100, 129] {
            for _ in 0..20 {
                let mut r1 = rng.clone();
                let u = random_unit_vector(n, &mut rng);
                let v = random_unit_vector(n, &mut rng);
                let (mut a, mut b) = (Vec::new(), Vec::new());
                sample_signs(n, &mut r1, &mut a);
                sample_signs(n, &mut r1, &mut b);
                let dense: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
                assert!((dense - packed_cos(n, &a, &b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_dimension_is_always_collinear() {
        let r = run_ortho_sim(&OrthoRunSpec { dims: vec![1], num_pairs: 500, seed: 1 }).unwrap();
        assert_eq!(r[0].mean_abs_cos, 1.0);
        assert_eq!(r[0].max_abs_cos, 1.0);
        assert_eq!(r[0].frac_exceeding_eps, 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = OrthoRunSpec { dims: vec![2, 8, 33], num_pairs: 2000, seed: 5 };
        assert_eq!(run_ortho_sim(&spec).unwrap(), run_ortho_sim(&spec).unwrap());
    }

    #[test]
    fn validation() {
        assert!(run_ortho_sim(&OrthoRunSpec { dims: vec![], num_pairs: 1, seed: 0 }).is_err());
        assert!(run_ortho_sim(&OrthoRunSpec { dims: vec![4], num_pairs: 0, seed: 0 }).is_err());
        assert!(run_ortho_sim(&OrthoRunSpec { dims: vec![0], num_pairs: 3, seed: 0 }).is_err());
    }

    #[test]
    fn bound_values() {
        assert!((hoeffding_bound(1024) - 2.0 * (-16f64).exp()).abs() < 1e-20);
        assert!((ortho_epsilon(16) - (5.0f64 / 4.0).sqrt()).abs() < 1e-15);
    }
}
