//! Recursive feature elimination on a dataset with five informative and
//! fifteen noise columns.
//!
//! cargo run --release --example select_features -- [seed]

use nids_core::featsel::{rfe, ForestParams, RfeParams};
use nids_core::synth::informative_dataset;

fn main() -> nids_core::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(0, |v| v.parse().expect("seed"));
    let data = informative_dataset(600, 5, 15, seed);
    let params = RfeParams {
        target_k: 5,
        forest: ForestParams {
            seed,
            ..ForestParams::default()
        },
        ..RfeParams::default()
    };
    let ranking = rfe(&data, &params)?;
    println!("selected: {}", ranking.selected.join(", "));
    println!("{}", ranking.importance_report());
    Ok(())
}
