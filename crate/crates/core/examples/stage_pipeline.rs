//! Runs the monitor over build, test, deploy and monitor inputs, writing one
//! log per stage into a temporary directory.
//!
//! cargo run --release --example stage_pipeline -- [out-dir]

use std::path::PathBuf;

use nids_core::fixtures::MonitorFixture;
use nids_core::monitor::{stage_run, MonitorConfig, Stage, StageSpec};
use nids_core::pipeline::save_model_file;

fn main() -> nids_core::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("nids-stage-pipeline"), PathBuf::from);
    std::fs::create_dir_all(&out)?;
    let fixture = MonitorFixture::build(3000, 11)?;
    let model = out.join("model.nidm");
    save_model_file(&fixture.model, &model)?;

    let mut stages = Vec::new();
    for (stage, csv) in Stage::ALL.into_iter().zip(fixture.stage_csvs()?) {
        let input = out.join(format!("{stage}.csv"));
        std::fs::write(&input, csv)?;
        stages.push(StageSpec {
            config: MonitorConfig {
                stage,
                ..MonitorConfig::default()
            },
            input,
        });
    }
    let report = stage_run(&model, &stages, &out);
    for outcome in &report.stages {
        match &outcome.result {
            Ok(s) => println!("{:<8} anomalies={} log={}", outcome.stage, s.anomalies, outcome.log.display()),
            Err(e) => println!("{:<8} failed: {e}", outcome.stage),
        }
    }
    println!("exit status {}", report.exit_status());
    Ok(())
}
