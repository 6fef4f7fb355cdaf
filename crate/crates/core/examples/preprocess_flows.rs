//! Cleans a flow CSV (or the built-in stand-in) and prints the drop report.
//!
//! cargo run --example preprocess_flows -- [flows.csv]

use nids_core::flowdata::{preprocess, CleanConfig, LabelMap, Profile};
use nids_core::synth::cic_standin_csv;

fn main() -> nids_core::Result<()> {
    let csv = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => cic_standin_csv(2000, 1),
    };
    let map = LabelMap::for_profile(Profile::Ids2017)?;
    let (data, report) = preprocess(csv.as_bytes(), &map, &CleanConfig::default())?;
    println!("{report}");
    println!("{} rows x {} features kept", data.n_rows(), data.n_cols());
    for (name, count) in data.class_names().iter().zip(data.class_counts()) {
        println!("{name:<12} {count}");
    }
    Ok(())
}
