use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};

use crate::error::{Error, Result};

/// CI/CD stage tags, in pipeline order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Build,
    Test,
    Deploy,
    Monitor,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Build, Stage::Test, Stage::Deploy, Stage::Monitor];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Build => "build",
            Stage::Test => "test",
            Stage::Deploy => "deploy",
            Stage::Monitor => "monitor",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown stage {s:?} (build|test|deploy|monitor)")))
    }
}

/// Class name with internal whitespace replaced by `-`.
pub fn class_token(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join("-")
}

fn field(value: Option<&str>) -> Option<String> {
    value.map(class_token).filter(|v| !v.is_empty() && v != "-")
}

/// Parses a record timestamp: ISO-8601 (`2017-07-07T09:30:00Z`) or the CIC
/// forms `dd/mm/yyyy HH:MM[:SS]`, optionally with an AM/PM suffix.
pub fn parse_record_timestamp(text: &str) -> Option<DateTime<Utc>> {
    let t = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(t) {
        return Some(dt.with_timezone(&Utc));
    }
    const FORMATS: [&str; 6] = [
        "%d/%m/%Y %H:%M:%S",
        "%d/%m/%Y %H:%M",
        "%d/%m/%Y %I:%M:%S %p",
        "%d/%m/%Y %I:%M %p",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(t, f).ok())
        .map(|n| Utc.from_utc_datetime(&n))
}

/// One anomaly line. Values are normalised at construction to what the line
/// grammar can carry: whole seconds, space-free tokens and a confidence
/// rounded to three decimals, so that parsing an emitted line gives back an
/// equal entry.
#[derive(Clone, Debug, PartialEq)]
pub struct AnomalyLogEntry {
    pub timestamp: DateTime<Utc>,
    pub stage: Stage,
    pub flow_id: Option<String>,
    pub source: Option<String>,
    pub destination: Option<String>,
    pub verdict: String,
    pub confidence: f64,
}

const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

impl AnomalyLogEntry {
    pub fn new(
        timestamp: DateTime<Utc>,
        stage: Stage,
        flow_id: Option<&str>,
        source: Option<&str>,
        destination: Option<&str>,
        verdict: &str,
        confidence: f64,
    ) -> Self {
        let secs = timestamp.timestamp();
        AnomalyLogEntry {
            timestamp: Utc.timestamp_opt(secs, 0).single().unwrap_or(timestamp),
            stage,
            flow_id: field(flow_id),
            source: field(source),
            destination: field(destination),
            verdict: class_token(verdict),
            confidence: (confidence.clamp(0.0, 1.0) * 1000.0).round() / 1000.0,
        }
    }

    pub fn parse(line: &str) -> Result<Self> {
        let bad = |why: &str| Error::Input(format!("malformed log line ({why}): {line:?}"));
        let rest = line.trim_end_matches(['\r', '\n']);
        let rest = rest.strip_prefix('[').ok_or_else(|| bad("no timestamp"))?;
        let (ts, rest) = rest.split_once("Z] ").ok_or_else(|| bad("no timestamp"))?;
        let timestamp = NaiveDateTime::parse_from_str(ts, TIME_FORMAT)
            .map(|n| Utc.from_utc_datetime(&n))
            .map_err(|_| bad("timestamp"))?;
        let mut fields = rest.split(' ');
        let mut next = |key: &str| -> Result<&str> {
            fields
                .next()
                .and_then(|f| f.strip_prefix(key))
                .and_then(|f| f.strip_prefix('='))
                .ok_or_else(|| bad(key))
        };
        let stage = next("stage")?.parse()?;
        let opt = |v: &str| (v != "-").then(|| v.to_string());
        let flow_id = opt(next("flow")?);
        let source = opt(next("src")?);
        let destination = opt(next("dst")?);
        let verdict = next("verdict")?.to_string();
        let conf_text = next("confidence")?;
        if fields.next().is_some() {
            return Err(bad("trailing fields"));
        }
        let confidence: f64 = conf_text.parse().map_err(|_| bad("confidence"))?;
        if !(0.0..=1.0).contains(&confidence) || verdict.is_empty() {
            return Err(bad("value range"));
        }
        Ok(AnomalyLogEntry {
            timestamp,
            stage,
            flow_id,
            source,
            destination,
            verdict,
            confidence,
        })
    }
}

impl fmt::Display for AnomalyLogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dash = |v: &Option<String>| v.clone().unwrap_or_else(|| "-".into());
        write!(
            f,
            "[{}Z] stage={} flow={} src={} dst={} verdict={} confidence={:.3}",
            self.timestamp.format(TIME_FORMAT),
            self.stage,
            dash(&self.flow_id),
            dash(&self.source),
            dash(&self.destination),
            self.verdict,
            self.confidence
        )
    }
}

/// Writes one line and flushes it before returning.
pub fn emit_log<W: Write>(entry: &AnomalyLogEntry, sink: &mut W) -> Result<()> {
    writeln!(sink, "{entry}")?;
    sink.flush()?;
    Ok(())
}

/// Counters written at the end of a monitoring run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonitorSummary {
    pub stage: Stage,
    /// Data rows read, scored or not.
    pub total: u64,
    pub scored: u64,
    pub skipped: u64,
    pub anomalies: u64,
    /// Verdict counts over scored rows, by class token, in model class order.
    pub per_class: Vec<(String, u64)>,
    pub elapsed_ms: u64,
}

impl MonitorSummary {
    /// 0 without anomaly lines, 2 with at least one.
    pub fn exit_status(&self) -> i32 {
        if self.anomalies > 0 {
            2
        } else {
            0
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::Input(format!("malformed summary block ({why})"));
        let mut lines = text.lines().filter(|l| l.starts_with("# ")).skip_while(|l| !l.starts_with("# summary "));
        let head = lines.next().ok_or_else(|| bad("no header"))?;
        let stage = head
            .strip_prefix("# summary stage=")
            .ok_or_else(|| bad("header"))?
            .parse()?;
        let counts = lines.next().ok_or_else(|| bad("no totals"))?;
        let mut values = [0u64; 4];
        let keys = ["total", "anomalies", "skipped", "elapsed_ms"];
        let parts: Vec<&str> = counts.trim_start_matches("# ").split(' ').collect();
        if parts.len() != 4 {
            return Err(bad("totals"));
        }
        for ((slot, key), part) in values.iter_mut().zip(keys).zip(parts) {
            let v = part
                .strip_prefix(key)
                .and_then(|p| p.strip_prefix('='))
                .ok_or_else(|| bad(key))?;
            *slot = v.parse().map_err(|_| bad(key))?;
        }
        let mut per_class = Vec::new();
        for line in lines {
            let Some(rest) = line.strip_prefix("# class ") else { break };
            let (name, n) = rest.rsplit_once('=').ok_or_else(|| bad("class line"))?;
            per_class.push((name.to_string(), n.parse().map_err(|_| bad("class count"))?));
        }
        Ok(MonitorSummary {
            stage,
            total: values[0],
            scored: values[0].saturating_sub(values[2]),
            skipped: values[2],
            anomalies: values[1],
            per_class,
            elapsed_ms: values[3],
        })
    }
}

impl fmt::Display for MonitorSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# summary stage={}", self.stage)?;
        writeln!(
            f,
            "# total={} anomalies={} skipped={} elapsed_ms={}",
            self.total, self.anomalies, self.skipped, self.elapsed_ms
        )?;
        for (name, n) in &self.per_class {
            writeln!(f, "# class {name}={n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use chrono::Timelike;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn dos_line() {
        let ts = parse_record_timestamp("07/07/2017 09:30:05").unwrap();
        let e = AnomalyLogEntry::new(ts, Stage::Monitor, Some("1-2-3"), Some("10.0.0.1:443"), None, "DoS", 0.98765);
        assert_eq!(
            e.to_string(),
            "[2017-07-07T09:30:05Z] stage=monitor flow=1-2-3 src=10.0.0.1:443 dst=- verdict=DoS confidence=0.988"
        );
        let mut sink = Vec::new();
        emit_log(&e, &mut sink).unwrap();
        emit_log(&AnomalyLogEntry { verdict: "Bot".into(), ..e.clone() }, &mut sink).unwrap();
        let text = String::from_utf8(sink).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].contains("verdict=Bot"));
    }

    #[test]
    fn tokens_and_timestamps() {
        assert_eq!(class_token("Brute Force"), "Brute-Force");
        assert_eq!(parse_record_timestamp("7/7/2017 9:30").unwrap().hour(), 9);
        assert_eq!(parse_record_timestamp("02/03/2018 08:47:38 PM").unwrap().hour(), 20);
        assert!(parse_record_timestamp("2018-03-02T08:47:38Z").is_some());
        assert!(parse_record_timestamp("yesterday").is_none());
    }

    #[test]
    fn summary_block() {
        let s = MonitorSummary {
            stage: Stage::Test,
            total: 5,
            scored: 4,
            skipped: 1,
            anomalies: 2,
            per_class: vec![("Benign".into(), 2), ("Brute-Force".into(), 2)],
            elapsed_ms: 17,
        };
        let text = s.to_string();
        assert_eq!(
            text,
            "# summary stage=test\n# total=5 anomalies=2 skipped=1 elapsed_ms=17\n# class Benign=2\n# class Brute-Force=2\n"
        );
        assert_eq!(MonitorSummary::parse(&text).unwrap(), s);
    }

    #[test]
    fn rejects_garbage() {
        for line in ["", "[2017-07-07T09:30:05Z] stage=prod flow=- src=- dst=- verdict=DoS confidence=0.5",
                     "[2017-07-07T09:30:05Z] stage=test flow=- src=- dst=- verdict=DoS confidence=1.5",
                     "[2017-07-07T09:30:05Z] stage=test flow=- src=- dst=- verdict=DoS"] {
            assert!(AnomalyLogEntry::parse(line).is_err(), "{line}");
        }
    }

    fn token() -> impl Strategy<Value = Option<String>> {
        prop::option::of("[A-Za-z0-9.:_-]{1,12}( [A-Za-z0-9]{1,4})?")
    }

    proptest! {
        #[test]
        fn emit_parse_round_trip(
            secs in 0i64..4_000_000_000,
            stage in 0usize..4,
            flow in token(),
            src in token(),
            dst in token(),
            verdict in "[A-Za-z]{1,8}( [A-Za-z]{1,8})?",
            conf in 0.0f64..=1.0,
        ) {
            let ts = Utc.timestamp_opt(secs, 0).unwrap();
            let e = AnomalyLogEntry::new(ts, Stage::ALL[stage], flow.as_deref(), src.as_deref(), dst.as_deref(), &verdict, conf);
            let line = e.to_string();
            prop_assert!(!line.contains('\n'));
            prop_assert_eq!(AnomalyLogEntry::parse(&line).unwrap(), e);
        }
    }
}
