//! SMOTE followed by ENN on an imbalanced three-class dataset.
//!
//! cargo run --example rebalance

use nids_core::flowdata::{Dataset, Profile};
use nids_core::resample::{resample_pipeline, ResampleConfig};
use nids_core::rng::seeded;
use rand::Rng;

fn main() -> nids_core::Result<()> {
    let mut rng = seeded(5);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (class, (n, centre)) in [(600, 0.0), (80, 1.0), (15, 2.0)].into_iter().enumerate() {
        for _ in 0..n {
            values.push(centre + rng.random_range(-0.7..0.7));
            values.push(centre + rng.random_range(-0.7..0.7));
            labels.push(class);
        }
    }
    let data = Dataset::new(
        vec!["x".into(), "y".into()],
        values,
        labels,
        vec!["Benign".into(), "DoS".into(), "Bot".into()],
        Profile::Custom,
    )?;
    let (balanced, report) = resample_pipeline(&data, &ResampleConfig::default())?;
    println!("{report}");
    println!("{} rows -> {} rows", data.n_rows(), balanced.n_rows());
    Ok(())
}
