//! Writes the synthetic CIC-IDS2017-style flow CSV used in place of the real
//! dataset.
//!
//! cargo run --example standin_csv -- <out.csv> [rows] [seed]

use nids_core::synth::cic_standin_csv;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "standin.csv".into());
    let rows: usize = args.next().map_or(20_000, |v| v.parse().expect("rows"));
    let seed: u64 = args.next().map_or(7, |v| v.parse().expect("seed"));
    std::fs::write(&path, cic_standin_csv(rows, seed))?;
    println!("{rows} flows written to {path}");
    Ok(())
}
