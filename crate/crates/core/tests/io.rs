use ndarray::{array, Array2};
use proptest::prelude::*;
use sprev::dataset::{self, LabeledDataset};
use sprev::Error;

fn idx_pair(images: &[[u8; 4]], labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = vec![0, 0, 8, 3];
    img.extend((images.len() as u32).to_be_bytes());
    img.extend(2u32.to_be_bytes());
    img.extend(2u32.to_be_bytes());
    for im in images {
        img.extend(im);
    }
    let mut lab = vec![0, 0, 8, 1];
    lab.extend((labels.len() as u32).to_be_bytes());
    lab.extend(labels);
    (img, lab)
}

#[test]
fn hand_built_idx() {
    let (img, lab) = idx_pair(&[[0, 255, 7, 1], [9, 9, 9, 9], [1, 2, 3, 4]], &[3, 1, 3]);
    let ds = dataset::parse_idx(&img, &lab).unwrap();
    assert_eq!(ds.features, array![[0.0, 255.0, 7.0, 1.0], [9.0, 9.0, 9.0, 9.0], [1.0, 2.0, 3.0, 4.0]]);
    assert_eq!(ds.class_names, vec!["3", "1"]);
    assert_eq!(ds.labels, vec![0, 1, 0]);
    assert_eq!(ds.feature_names, vec!["px0", "px1", "px2", "px3"]);
}

#[test]
fn malformed_idx() {
    let (img, lab) = idx_pair(&[[0; 4], [1; 4]], &[0, 1]);
    let mut bad = img.clone();
    bad[3] = 1;
    assert!(matches!(dataset::parse_idx(&bad, &lab), Err(Error::BadMagic { .. })));
    assert!(matches!(dataset::parse_idx(&img[..20], &lab), Err(Error::TruncatedFile { .. })));
    let (_, short_labels) = idx_pair(&[[0; 4]], &[0]);
    assert!(matches!(dataset::parse_idx(&img, &short_labels), Err(Error::CountMismatch { .. })));
    assert!(matches!(dataset::parse_idx(&img[..2], &lab), Err(Error::TruncatedFile { .. })));
}

#[test]
fn idx_files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = idx_pair(&[[5, 6, 7, 8], [0, 0, 0, 1]], &[2, 4]);
    std::fs::write(dir.path().join("i"), img).unwrap();
    std::fs::write(dir.path().join("l"), lab).unwrap();
    let ds = dataset::load_idx(dir.path().join("i"), dir.path().join("l")).unwrap();
    assert_eq!(ds.num_samples(), 2);
    assert!(matches!(dataset::load_idx(dir.path().join("missing"), dir.path().join("l")), Err(Error::Io { .. })));
}

fn dataset_strategy() -> impl Strategy<Value = LabeledDataset> {
    (1usize..12, 1usize..6).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, m * n),
            prop::collection::vec("[a-z][a-z0-9 ,\"]{0,5}", m),
        )
            .prop_map(move |(values, labels)| {
                let features = Array2::from_shape_vec((m, n), values).unwrap();
                let names = (0..n).map(|j| format!("feat {j}")).collect();
                LabeledDataset::from_named_labels(features, &labels, names).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn csv_round_trip(ds in dataset_strategy()) {
        let mut bytes = Vec::new();
        dataset::write_csv_to(&ds, &mut bytes, "target").unwrap();
        let back = dataset::read_csv(bytes.as_slice(), "target").unwrap();
        prop_assert_eq!(back, ds);
    }
}

#[test]
fn csv_errors() {
    assert!(matches!(dataset::read_csv("a,b\n1,x\n".as_bytes(), "label"), Err(Error::MissingLabelColumn(_))));
    assert!(matches!(dataset::read_csv("a,label\nfoo,x\n".as_bytes(), "label"), Err(Error::NonNumericCell { .. })));
    assert!(matches!(dataset::read_csv("a,label\nNaN,x\n".as_bytes(), "label"), Err(Error::NonFiniteValue { .. })));
    assert!(matches!(dataset::read_csv("a,label\n".as_bytes(), "label"), Err(Error::EmptyDataset)));
}
