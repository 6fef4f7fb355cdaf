use std::fs::File;
use std::io::{BufReader, LineWriter};
use std::path::{Path, PathBuf};

use super::{run_monitor, MonitorConfig, MonitorSummary, Stage};
use crate::error::Result;
use crate::pipeline::load_model_file;

/// Exit status for a failed run.
pub const EXIT_FAILURE: i32 = 1;

/// Loads the model, then scores `input` into `log` (truncated first).
///
/// Nothing is written when the model or the input cannot be opened.
pub fn monitor_file(model: &Path, input: &Path, config: &MonitorConfig, log: &Path) -> Result<MonitorSummary> {
    let model = load_model_file(model)?;
    config.validate()?;
    let source = BufReader::new(File::open(input)?);
    let mut sink = LineWriter::new(File::create(log)?);
    run_monitor(source, &model, config, &mut sink)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageSpec {
    pub config: MonitorConfig,
    pub input: PathBuf,
}

#[derive(Debug)]
pub struct StageOutcome {
    pub stage: Stage,
    pub log: PathBuf,
    /// `Err` with the failure message for an operational error.
    pub result: std::result::Result<MonitorSummary, String>,
}

impl StageOutcome {
    pub fn exit_status(&self) -> i32 {
        match &self.result {
            Ok(s) => s.exit_status(),
            Err(_) => EXIT_FAILURE,
        }
    }
}

#[derive(Debug)]
pub struct StageRunReport {
    /// Stages that ran, in order; a failure ends the list.
    pub stages: Vec<StageOutcome>,
    /// Stages not run because an earlier one failed.
    pub skipped: Vec<Stage>,
}

impl StageRunReport {
    /// Maximum of the per-stage statuses.
    pub fn exit_status(&self) -> i32 {
        self.stages.iter().map(StageOutcome::exit_status).max().unwrap_or(0)
    }
}

/// Runs each stage in order against the model file, writing
/// `<out_dir>/<stage>.log`. The model is reloaded for every stage, as
/// separate pipeline steps would. Anomalies do not stop later stages; an
/// operational failure does.
pub fn stage_run(model: &Path, stages: &[StageSpec], out_dir: &Path) -> StageRunReport {
    let mut report = StageRunReport {
        stages: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, spec) in stages.iter().enumerate() {
        let log = out_dir.join(format!("{}.log", spec.config.stage));
        let result = monitor_file(model, &spec.input, &spec.config, &log).map_err(|e| e.to_string());
        let failed = result.is_err();
        report.stages.push(StageOutcome {
            stage: spec.config.stage,
            log,
            result,
        });
        if failed {
            report.skipped = stages[i + 1..].iter().map(|s| s.config.stage).collect();
            break;
        }
    }
    report
}
