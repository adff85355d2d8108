//! Ingestion and generation at survey scale.

use selfjoin::{generate_uniform, load_csv, Dataset};

#[test]
fn csv_round_trip_at_survey_scale() {
    let data = generate_uniform::<f64>(1_864_620, 2, 0.0, 100.0, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    data.save_csv(&path).unwrap();
    let back: Dataset = load_csv(&path, 2).unwrap();
    assert_eq!(back.len(), 1_864_620);
    assert_eq!(back.dims(), 2);
    assert_eq!(back, data);
}

#[test]
fn generator_covers_two_million_point_shape() {
    let data = generate_uniform::<f64>(2_000_000, 2, 0.0, 100.0, 7).unwrap();
    assert_eq!(data.len(), 2_000_000);
    assert_eq!(data.dims(), 2);
    let (min, max) = data.bounds();
    assert!(min.iter().all(|&m| m >= 0.0));
    assert!(max.iter().all(|&m| m <= 100.0));
}
