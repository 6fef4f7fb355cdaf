//! Saves a trained model, reloads it and shows that a damaged file is
//! rejected.
//!
//! cargo run --release --example persist_model

use nids_core::fixtures::compact_config;
use nids_core::flowdata::{preprocess, CleanConfig, LabelMap, Profile};
use nids_core::pipeline::{fit, load_model, model_to_bytes, FitOptions};
use nids_core::synth::cic_standin_csv;

fn main() -> nids_core::Result<()> {
    let map = LabelMap::for_profile(Profile::Ids2017)?;
    let (data, _) = preprocess(cic_standin_csv(2000, 2).as_bytes(), &map, &CleanConfig::default())?;
    let options = FitOptions {
        select: None,
        model: compact_config(1),
        ..FitOptions::default()
    };
    let outcome = fit(&data, Some(map.source().to_string()), &options)?;
    let bytes = model_to_bytes(&outcome.model);
    println!("model file: {} bytes", bytes.len());

    let loaded = load_model(bytes.as_slice())?;
    let prepared = outcome.test.clone();
    let before = outcome.model.predict(&outcome.model.prepare(&prepared)?)?;
    let after = loaded.predict(&loaded.prepare(&prepared)?)?;
    let same = before.iter().zip(&after).all(|(a, b)| a.distribution == b.distribution);
    println!("reloaded predictions identical on {} rows: {same}", before.len());

    let mut damaged = bytes.clone();
    let middle = damaged.len() / 2;
    damaged[middle] ^= 0x10;
    match load_model(damaged.as_slice()) {
        Ok(_) => println!("damaged file loaded (unexpected)"),
        Err(e) => println!("damaged file rejected: {e}"),
    }
    Ok(())
}
