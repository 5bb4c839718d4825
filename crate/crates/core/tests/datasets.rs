mod common;

use ganbench::datasets::{
    denormalize, flatten, kdd99_schema, load_tabular, normalize, parse_tabular, preprocess_kdd99, read_tensor_file,
    synth_gaussian_mixture, write_tensor_file, DatasetError, HeaderMode, MixtureComponent, MixtureSpec, NdArray,
    TabularOptions, KDD99_KEEP,
};
use ganbench::sample::SampleSet;
use proptest::prelude::*;

#[test]
fn csv_with_header_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rssi.csv");
    std::fs::write(&path, "ap1,ap2,room\n-60,-70,kitchen\n-55,-72,hall\n-61,-69,kitchen\n").unwrap();
    let ds = load_tabular(
        &path,
        &TabularOptions {
            label_column: Some("room".into()),
            ..TabularOptions::default()
        },
    )
    .unwrap();
    assert_eq!(ds.shape(), [3, 2]);
    assert_eq!(ds.column_names(), ["ap1", "ap2"]);
    assert_eq!(ds.data.labels().unwrap(), [1, 0, 1]);
    assert!(matches!(
        load_tabular(&dir.path().join("missing.csv"), &TabularOptions::default()),
        Err(DatasetError::Io { .. })
    ));
}

#[test]
fn kdd99_pipeline_keeps_eighteen_columns() {
    let text = common::kdd99_text(50, 1);
    let raw = parse_tabular(
        &text,
        &TabularOptions {
            header: HeaderMode::Absent,
            schema: Some(kdd99_schema(true)),
            label_column: Some("label".into()),
        },
    )
    .unwrap();
    let ds = preprocess_kdd99(&raw).unwrap();
    assert_eq!(ds.cols(), KDD99_KEEP);
    let names = ds.column_names();
    assert!(names.contains(&"count".to_string()));
    assert!(!names.iter().any(|n| n == "urgent" || n == "num_outbound_cmds" || n == "service"));
    assert!(ds.notes.iter().any(|n| n.starts_with("kdd99 columns:")));
}

#[test]
fn tensor_container_flattens_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("iq.bin");
    let a = NdArray::new(vec![4, 2, 3], (0..24).map(f64::from).collect()).unwrap();
    write_tensor_file(&path, &a).unwrap();
    let back = read_tensor_file(&path).unwrap();
    assert_eq!(back, a);
    let ds = flatten(&back).unwrap();
    assert_eq!(ds.shape(), [4, 6]);
    assert_eq!(ds.original_shape, vec![4, 2, 3]);
    assert_eq!(ds.data.row(1), &[6.0, 7.0, 8.0, 9.0, 10.0, 11.0]);
}

#[test]
fn mixture_is_seeded() {
    let spec = MixtureSpec {
        components: vec![
            MixtureComponent {
                weight: 0.5,
                mean: vec![0.0],
                variance: vec![1.0],
            },
            MixtureComponent {
                weight: 0.5,
                mean: vec![4.0],
                variance: vec![1.0],
            },
        ],
    };
    let a = synth_gaussian_mixture(&spec, 500, 7, true).unwrap();
    assert_eq!(a, synth_gaussian_mixture(&spec, 500, 7, true).unwrap());
    assert_ne!(a, synth_gaussian_mixture(&spec, 500, 8, true).unwrap());
    let mean = a.data.data().iter().sum::<f64>() / 500.0;
    assert!((mean - 2.0).abs() < 0.3, "{mean}");
}

proptest! {
    #[test]
    fn normalization_round_trips(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 1..40)) {
        let ds = ganbench::datasets::Dataset::from_samples(SampleSet::from_rows(&rows).unwrap()).unwrap();
        let (n, state) = normalize(&ds).unwrap();
        prop_assert!(n.data.data().iter().all(|v| (-1.0..=1.0).contains(v)));
        let back = denormalize(&n, &state).unwrap();
        for (a, b) in back.data.data().iter().zip(ds.data.data()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}
