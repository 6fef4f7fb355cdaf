//! Model files: round trips through disk and rejection of damaged files.

use std::sync::OnceLock;

use nids_core::fixtures::compact_config;
use nids_core::flowdata::{preprocess, CleanConfig, LabelMap, Profile};
use nids_core::pipeline::{
    fit, load_model_file, model_from_bytes, model_to_bytes, save_model_file, FitOptions, FitOutcome, FORMAT_VERSION,
};
use nids_core::synth::cic_standin_csv;
use nids_core::Error;

fn trained() -> &'static FitOutcome {
    static OUTCOME: OnceLock<FitOutcome> = OnceLock::new();
    OUTCOME.get_or_init(|| {
        let map = LabelMap::for_profile(Profile::Ids2017).unwrap();
        let (data, _) = preprocess(cic_standin_csv(1500, 4).as_bytes(), &map, &CleanConfig::default()).unwrap();
        let options = FitOptions {
            select: None,
            model: compact_config(3),
            ..FitOptions::default()
        };
        fit(&data, Some(map.source().to_string()), &options).unwrap()
    })
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn file_round_trip_preserves_predictions_and_metrics() {
    let outcome = trained();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.nidm");
    save_model_file(&outcome.model, &path).unwrap();
    let loaded = load_model_file(&path).unwrap();

    assert_eq!(loaded.features, outcome.model.features);
    assert_eq!(loaded.class_names, outcome.model.class_names);
    assert_eq!(loaded.config, outcome.model.config);
    assert_eq!(loaded.history, outcome.model.history);
    assert_eq!(bits(&loaded.network.flat_params()), bits(&outcome.model.network.flat_params()));

    let before = outcome.model.predict(&outcome.model.prepare(&outcome.test).unwrap()).unwrap();
    let after = loaded.predict(&loaded.prepare(&outcome.test).unwrap()).unwrap();
    for (a, b) in before.iter().zip(&after) {
        assert_eq!(a.class, b.class);
        assert_eq!(bits(&a.distribution), bits(&b.distribution));
    }
    assert_eq!(loaded.evaluate(&outcome.test).unwrap(), outcome.metrics);
}

#[test]
fn raw_records_score_identically_after_reload() {
    let outcome = trained();
    let loaded = model_from_bytes(&model_to_bytes(&outcome.model)).unwrap();
    let (records, _) = outcome.test.to_records();
    for record in records.iter().take(200) {
        let a = outcome.model.score_record(record).unwrap();
        let b = loaded.score_record(record).unwrap();
        assert_eq!(bits(&a.distribution), bits(&b.distribution));
    }
}

#[test]
fn serialisation_is_canonical() {
    let bytes = model_to_bytes(&trained().model);
    assert_eq!(model_to_bytes(&model_from_bytes(&bytes).unwrap()), bytes);
}

#[test]
fn every_payload_byte_is_covered_by_the_checksum() {
    let bytes = model_to_bytes(&trained().model);
    let mut damaged = bytes.clone();
    for at in (6..bytes.len() - 4).step_by(7) {
        damaged[at] ^= 0x80;
        assert!(
            matches!(model_from_bytes(&damaged), Err(Error::Checksum { .. })),
            "flip at byte {at} not reported as a checksum error"
        );
        damaged[at] = bytes[at];
    }
}

#[test]
fn damaged_checksum_trailer_is_rejected() {
    let mut bytes = model_to_bytes(&trained().model);
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    assert!(matches!(model_from_bytes(&bytes), Err(Error::Checksum { .. })));
}

#[test]
fn header_errors_are_distinguished() {
    let bytes = model_to_bytes(&trained().model);

    let mut magic = bytes.clone();
    magic[0] ^= 0xff;
    assert!(matches!(model_from_bytes(&magic), Err(Error::Format)));

    let mut version = bytes.clone();
    version[4..6].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
    assert!(matches!(
        model_from_bytes(&version),
        Err(Error::Version { found, expected }) if found == FORMAT_VERSION + 1 && expected == FORMAT_VERSION
    ));
}

#[test]
fn truncated_files_fail_without_panicking() {
    let bytes = model_to_bytes(&trained().model);
    for len in [0, 3, 5, 8, 64, bytes.len() / 2, bytes.len() - 1] {
        assert!(model_from_bytes(&bytes[..len]).is_err(), "prefix of {len} bytes accepted");
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_model_file(&dir.path().join("absent.nidm")), Err(Error::Io(_))));
}
