//! Trains the default CNN-LSTM on the bundled synthetic CIC-IDS2017 stand-in
//! and prints the held-out metrics.
//!
//! cargo run --release --example train_standin -- [rows] [epochs]

use std::time::Instant;

use nids_core::featsel::{ForestParams, RfeParams};
use nids_core::flowdata::{preprocess, CleanConfig, LabelMap, Profile};
use nids_core::pipeline::{fit, FitOptions, ModelConfig};
use nids_core::synth::cic_standin_csv;

fn main() -> nids_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let rows: usize = args.next().map_or(20_000, |v| v.parse().expect("rows"));
    let epochs: usize = args.next().map_or(30, |v| v.parse().expect("epochs"));

    let map = LabelMap::for_profile(Profile::Ids2017)?;
    let csv = cic_standin_csv(rows, 7);
    let (data, report) = preprocess(csv.as_bytes(), &map, &CleanConfig::default())?;
    println!(
        "{} rows x {} features after cleaning ({} rows dropped)",
        data.n_rows(),
        data.n_cols(),
        report.rows.len()
    );

    let options = FitOptions {
        select: Some(RfeParams {
            target_k: 30,
            step: 4,
            forest: ForestParams {
                n_trees: 25,
                ..ForestParams::default()
            },
        }),
        model: ModelConfig {
            epochs,
            ..ModelConfig::default()
        },
        ..FitOptions::default()
    };
    let start = Instant::now();
    let out = fit(&data, Some(map.source().to_string()), &options)?;
    println!("{}", out.summary);
    if let Some(r) = &out.resample {
        println!("{r}");
    }
    for (i, e) in out.model.history.epochs.iter().enumerate() {
        println!("epoch {:>2}  loss {:.4}  acc {:.4}", i + 1, e.loss, e.accuracy);
    }
    println!("{}", out.metrics);
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
