//! Supervised 2-D embedding of labeled data onto a regular class polygon,
//! with kNN benchmarking, an orthogonality simulation and SVG rendering.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod layout;
pub mod metric;
pub mod ortho;
pub mod pipeline;
pub mod render;
pub mod rng;

pub use dataset::{CullSpec, LabeledDataset};
pub use error::{Error, Result};
pub use layout::{embed, Embedding2D, Polygon};
pub use metric::MetricKind;
pub use pipeline::{EmbedConfig, WeightKernel};
