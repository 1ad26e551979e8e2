mod common;

use ndarray::Array2;
use sprev::layout::{self, make_polygon};
use sprev::pipeline::{self, EmbedConfig};
use sprev::rng;
use sprev::LabeledDataset;

fn weights(ds: &LabeledDataset, cfg: &EmbedConfig) -> Array2<f64> {
    let scaled = pipeline::min_max_scale(ds);
    let centroids = pipeline::class_centroids(&scaled).unwrap();
    let anchors = pipeline::surface_anchors(&centroids, &ds.class_names).unwrap();
    pipeline::weight_rows(&pipeline::similarity_matrix(&scaled, &anchors, cfg.metric).unwrap(), cfg)
}

/// Reordering rows so classes appear in a different order relabels the
/// vertices; each sample keeps its weights and follows its class's vertex.
#[test]
fn class_relabeling_moves_points_with_their_vertices() {
    let cfg = EmbedConfig::default();
    let mut rng = rng::prng(3);
    for _ in 0..20 {
        let ds = common::random_dataset(&mut rng, 40, 12, 6);
        let m = ds.num_samples();
        let order: Vec<usize> = (0..m).rev().collect();
        let names: Vec<&str> = order.iter().map(|&i| ds.class_names[ds.labels[i]].as_str()).collect();
        let features = Array2::from_shape_fn(ds.features.dim(), |(i, j)| ds.features[[order[i], j]]);
        let flipped = LabeledDataset::from_named_labels(features, &names, ds.feature_names.clone()).unwrap();

        let w = weights(&ds, &cfg);
        let emb = layout::embed(&flipped, &cfg).unwrap();
        let polygon = make_polygon(ds.num_classes()).unwrap();
        for (new_i, &old_i) in order.iter().enumerate() {
            let mut expected = [0.0; 2];
            for (c, name) in ds.class_names.iter().enumerate() {
                let new_c = flipped.class_names.iter().position(|n| n == name).unwrap();
                let v = polygon.vertex(new_c);
                expected[0] += w[[old_i, c]] * v[0];
                expected[1] += w[[old_i, c]] * v[1];
            }
            let got = emb.point(new_i);
            assert!((got[0] - expected[0]).abs() < 1e-12 && (got[1] - expected[1]).abs() < 1e-12);
        }
    }
}

#[test]
fn matches_naive_reference_on_larger_inputs() {
    let cfg = EmbedConfig::default();
    let mut rng = rng::prng(11);
    for _ in 0..5 {
        let ds = common::random_dataset(&mut rng, 300, 300, 8);
        let emb = layout::embed(&ds, &cfg).unwrap();
        let naive = common::naive_embed(&common::rows(&ds.features), &ds.labels, ds.num_classes(), cfg.epsilon);
        for (i, p) in naive.iter().enumerate() {
            let q = emb.point(i);
            assert!((p[0] - q[0]).abs() < 1e-9 && (p[1] - q[1]).abs() < 1e-9);
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let ds = common::random_dataset(&mut rng::prng(5), 200, 50, 5);
    let cfg = EmbedConfig::default();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| layout::embed(&ds, &cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}
