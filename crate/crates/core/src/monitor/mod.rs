//! Online scoring of flow streams into CI/CD stage logs with gating exit
//! statuses: 0 clean, 2 anomalies logged, 1 operational failure.

mod log;
mod run;
mod stages;

pub use log::{class_token, emit_log, parse_record_timestamp, AnomalyLogEntry, MonitorSummary, Stage};
pub use run::{run_monitor, score_flow, FollowConfig, FollowReader, MonitorConfig};
pub use stages::{monitor_file, stage_run, StageOutcome, StageRunReport, StageSpec, EXIT_FAILURE};
