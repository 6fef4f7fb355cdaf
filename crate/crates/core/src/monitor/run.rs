use std::io::{self, Read, Write};
use std::thread;
use std::time::{Duration, Instant};

use chrono::Utc;

use super::{class_token, emit_log, parse_record_timestamp, AnomalyLogEntry, MonitorSummary, Stage};
use crate::error::{Error, Result};
use crate::flowdata::{FlowReader, FlowRecord};
use crate::pipeline::{Prediction, TrainedModel};

/// Follow-mode polling of a growing input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FollowConfig {
    pub poll: Duration,
    /// Stop after this long without new bytes.
    pub idle_timeout: Duration,
}

impl Default for FollowConfig {
    fn default() -> Self {
        FollowConfig {
            poll: Duration::from_millis(500),
            idle_timeout: Duration::from_secs(5),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorConfig {
    pub stage: Stage,
    /// Minimum confidence for an anomalous verdict to be logged.
    pub threshold: f64,
    /// Classes that raise alerts; `None` means every class except `Benign`.
    pub anomalous: Option<Vec<String>>,
    /// `Some` to keep reading appended data until the input goes idle.
    pub follow: Option<FollowConfig>,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            stage: Stage::Monitor,
            threshold: 0.5,
            anomalous: None,
            follow: None,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Parameter(format!("alert threshold {} outside [0, 1]", self.threshold)));
        }
        Ok(())
    }

    pub fn is_anomalous(&self, class: &str) -> bool {
        match &self.anomalous {
            Some(list) => list.iter().any(|c| c == class || class_token(c) == class_token(class)),
            None => !class.eq_ignore_ascii_case("benign"),
        }
    }
}

/// `Read` adapter that treats end of data as "not yet": it polls until bytes
/// arrive or the idle timeout elapses.
pub struct FollowReader<R> {
    inner: R,
    config: FollowConfig,
}

impl<R: Read> FollowReader<R> {
    pub fn new(inner: R, config: FollowConfig) -> Self {
        FollowReader { inner, config }
    }
}

impl<R: Read> Read for FollowReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let idle_since = Instant::now();
        loop {
            let n = self.inner.read(buf)?;
            if n > 0 || buf.is_empty() || idle_since.elapsed() >= self.config.idle_timeout {
                return Ok(n);
            }
            thread::sleep(self.config.poll);
        }
    }
}

/// Online scoring of one record. Shares [`TrainedModel::score_record`] with
/// offline evaluation, so verdicts and distributions are identical.
pub fn score_flow(model: &TrainedModel, record: &FlowRecord) -> Result<Prediction> {
    model.score_record(record)
}

/// Scores every record of `input`, appending one flushed line per alert and
/// a summary block to `sink`.
///
/// Malformed rows (parse failures, unknown categories, missing values) are
/// counted as skipped. A header that lacks a selected feature, an unreadable
/// input or a failing sink is an error.
pub fn run_monitor<R: Read, W: Write>(
    input: R,
    model: &TrainedModel,
    config: &MonitorConfig,
    sink: &mut W,
) -> Result<MonitorSummary> {
    config.validate()?;
    let start = Instant::now();
    let input: Box<dyn Read + '_> = match config.follow {
        Some(f) => Box::new(FollowReader::new(input, f)),
        None => Box::new(input),
    };
    let mut reader = FlowReader::new(input)?;
    if let Some(missing) = model.features.iter().find(|f| !reader.header().contains(f)) {
        return Err(Error::Schema(format!("input lacks selected feature {missing:?}")));
    }
    let tokens: Vec<String> = model.class_names.iter().map(|c| class_token(c)).collect();
    let alerting: Vec<bool> = model.class_names.iter().map(|c| config.is_anomalous(c)).collect();
    let mut per_class = vec![0u64; tokens.len()];
    let (mut total, mut skipped, mut anomalies) = (0u64, 0u64, 0u64);

    while let Some(item) = reader.next_record() {
        if reader.failed() {
            return Err(match item {
                Err(e) => Error::Io(io::Error::other(e.message)),
                Ok(_) => Error::Io(io::Error::other("input read failed")),
            });
        }
        total += 1;
        let Ok(record) = item else {
            skipped += 1;
            continue;
        };
        let prediction = match score_flow(model, &record) {
            Ok(p) => p,
            Err(Error::Row { .. } | Error::UnknownCategory { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        per_class[prediction.class] += 1;
        if alerting[prediction.class] && prediction.confidence >= config.threshold {
            let id = record.identity();
            let timestamp = id
                .timestamp
                .as_deref()
                .and_then(parse_record_timestamp)
                .unwrap_or_else(Utc::now);
            let entry = AnomalyLogEntry::new(
                timestamp,
                config.stage,
                id.flow_id.as_deref(),
                id.source.as_deref(),
                id.destination.as_deref(),
                &model.class_names[prediction.class],
                prediction.confidence,
            );
            emit_log(&entry, sink)?;
            anomalies += 1;
        }
    }

    let summary = MonitorSummary {
        stage: config.stage,
        total,
        scored: total - skipped,
        skipped,
        anomalies,
        per_class: tokens.into_iter().zip(per_class).collect(),
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    write!(sink, "{summary}")?;
    sink.flush()?;
    Ok(summary)
}
