//! Distance functions for the sample-to-anchor similarity matrix.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricKind {
    #[default]
    Euclidean,
    Manhattan,
    /// `1 - cos(u, v)` on raw (uncentered) vectors, in `[0, 2]`.
    CosineDistance,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Manhattan => "manhattan",
            MetricKind::CosineDistance => "cosine",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(MetricKind::Euclidean),
            "manhattan" => Ok(MetricKind::Manhattan),
            "cosine" => Ok(MetricKind::CosineDistance),
            other => Err(Error::UnsupportedMetric(other.to_string())),
        }
    }
}

pub fn dist(kind: MetricKind, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(match kind {
        MetricKind::Euclidean => euclidean(u, v),
        MetricKind::Manhattan => u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum(),
        MetricKind::CosineDistance => cosine_distance(u, v)?,
    })
}

#[inline]
pub(crate) fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVectorCosine);
    }
    let cos = (dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0);
    Ok(1.0 - cos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(dist(MetricKind::Euclidean, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(dist(MetricKind::Manhattan, &[1.0, 2.0, 3.0], &[2.0, 0.0, 3.0]).unwrap(), 3.0);
        let u = [0.3, -1.2, 4.0];
        for kind in [MetricKind::Euclidean, MetricKind::Manhattan, MetricKind::CosineDistance] {
            assert!(dist(kind, &u, &u).unwrap().abs() < 1e-15, "{kind}");
        }
        assert!((dist(MetricKind::CosineDistance, &[1.0, 0.0], &[-1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            dist(MetricKind::Euclidean, &[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(
            dist(MetricKind::CosineDistance, &[0.0, 0.0], &[1.0, 2.0]),
            Err(Error::ZeroVectorCosine)
        ));
        assert!(matches!("wasserstein".parse::<MetricKind>(), Err(Error::UnsupportedMetric(_))));
        assert_eq!("cosine".parse::<MetricKind>().unwrap(), MetricKind::CosineDistance);
    }

    fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..20).prop_flat_map(|n| {
            (
                proptest::collection::vec(-100.0f64..100.0, n),
                proptest::collection::vec(-100.0f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn symmetric_and_ordered((u, v) in pair()) {
            let e = dist(MetricKind::Euclidean, &u, &v).unwrap();
            let m = dist(MetricKind::Manhattan, &u, &v).unwrap();
            prop_assert_eq!(e, dist(MetricKind::Euclidean, &v, &u).unwrap());
            prop_assert_eq!(m, dist(MetricKind::Manhattan, &v, &u).unwrap());
            prop_assert!(e >= 0.0 && m >= 0.0);
            prop_assert!(e <= m * (1.0 + 1e-12));
            if u.iter().any(|&x| x != 0.0) && v.iter().any(|&x| x != 0.0) {
                let c1 = dist(MetricKind::CosineDistance, &u, &v).unwrap();
                let c2 = dist(MetricKind::CosineDistance, &v, &u).unwrap();
                prop_assert!((c1 - c2).abs() < 1e-12);
                prop_assert!((0.0..=2.0).contains(&c1));
            }
        }
    }
}
