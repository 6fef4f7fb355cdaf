//! Scores a three-flow stream (Benign, DoS, Benign) and prints the anomaly
//! log it produces.
//!
//! cargo run --release --example monitor_stream

use nids_core::fixtures::MonitorFixture;
use nids_core::monitor::{run_monitor, MonitorConfig};

fn main() -> nids_core::Result<()> {
    let fixture = MonitorFixture::build(3000, 11)?;
    let csv = fixture.anomaly_csv()?;
    let mut log = Vec::new();
    let summary = run_monitor(csv.as_bytes(), &fixture.model, &MonitorConfig::default(), &mut log)?;
    print!("{}", String::from_utf8_lossy(&log));
    println!("exit status {}", summary.exit_status());
    Ok(())
}
