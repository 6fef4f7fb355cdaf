use std::fs;
use std::io::Write;
use std::sync::OnceLock;
use std::thread;
use std::time::Duration;

use nids_core::fixtures::MonitorFixture;
use nids_core::flowdata::parse_flow_csv;
use nids_core::monitor::{
    monitor_file, run_monitor, stage_run, AnomalyLogEntry, FollowConfig, MonitorConfig, MonitorSummary, Stage,
    StageSpec,
};
use nids_core::pipeline::save_model_file;

fn fixture() -> &'static MonitorFixture {
    static F: OnceLock<MonitorFixture> = OnceLock::new();
    F.get_or_init(|| MonitorFixture::build(3000, 11).expect("fixture"))
}

fn run(csv: &str, config: &MonitorConfig) -> (MonitorSummary, String) {
    let mut sink = Vec::new();
    let s = run_monitor(csv.as_bytes(), &fixture().model, config, &mut sink).unwrap();
    (s, String::from_utf8(sink).unwrap())
}

fn anomaly_lines(log: &str) -> Vec<AnomalyLogEntry> {
    log.lines().filter(|l| !l.starts_with('#')).map(|l| AnomalyLogEntry::parse(l).unwrap()).collect()
}

#[test]
fn three_flow_fixture_gates() {
    let f = fixture();
    let (summary, log) = run(&f.anomaly_csv().unwrap(), &MonitorConfig::default());
    let lines = anomaly_lines(&log);
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].verdict, "DoS");
    assert_eq!(lines[0].stage, Stage::Monitor);
    assert_eq!(summary.exit_status(), 2);
    assert_eq!((summary.total, summary.skipped, summary.anomalies), (3, 0, 1));
    assert_eq!(MonitorSummary::parse(&log).unwrap().anomalies, 1);
    // Record timestamps make the anomaly lines reproducible.
    let (_, again) = run(&f.anomaly_csv().unwrap(), &MonitorConfig::default());
    assert_eq!(log.lines().next(), again.lines().next());
}

#[test]
fn clean_fixture_passes() {
    let (summary, log) = run(&fixture().clean_csv(6).unwrap(), &MonitorConfig::default());
    assert!(anomaly_lines(&log).is_empty());
    assert_eq!(summary.exit_status(), 0);
    assert_eq!(summary.per_class.iter().find(|(c, _)| c == "Benign").unwrap().1, 6);
}

#[test]
fn online_matches_offline_bitwise() {
    let f = fixture();
    let csv = f.stage_csvs().unwrap()[3].clone();
    let table = parse_flow_csv(csv.as_bytes()).unwrap();
    let data = {
        let map = f.model.label_map().unwrap().unwrap();
        let cfg = nids_core::flowdata::CleanConfig { zero_threshold: 1.0, ..Default::default() };
        nids_core::flowdata::preprocess(csv.as_bytes(), &map, &cfg).unwrap().0
    };
    let offline = f.model.predict(&f.model.prepare(&data).unwrap()).unwrap();
    assert_eq!(offline.len(), table.records.len());
    for (rec, off) in table.records.iter().zip(&offline) {
        let on = nids_core::monitor::score_flow(&f.model, rec).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&on.distribution), bits(&off.distribution));
    }
}

#[test]
fn malformed_rows_are_skipped() {
    let f = fixture();
    let mut csv = f.anomaly_csv().unwrap();
    csv.push_str("not,a,row\n");
    let mut broken: Vec<String> = f.rows("Benign", 3).unwrap()[2].split(',').map(String::from).collect();
    broken[10] = "abc".into();
    csv.push_str(&broken.join(","));
    csv.push('\n');
    let (summary, _) = run(&csv, &MonitorConfig::default());
    assert_eq!((summary.total, summary.skipped, summary.scored), (5, 2, 3));
    assert_eq!(summary.exit_status(), 2);
}

#[test]
fn threshold_and_anomalous_set() {
    let csv = fixture().anomaly_csv().unwrap();
    let strict = MonitorConfig { threshold: 1.0, ..MonitorConfig::default() };
    assert!(run(&csv, &strict).0.anomalies <= 1);
    let only_bot = MonitorConfig { anomalous: Some(vec!["Bot".into()]), ..MonitorConfig::default() };
    assert_eq!(run(&csv, &only_bot).0.anomalies, 0);
    let bad = MonitorConfig { threshold: 1.5, ..MonitorConfig::default() };
    assert!(run_monitor(csv.as_bytes(), &fixture().model, &bad, &mut Vec::new()).is_err());
}

#[test]
fn header_missing_feature_fails() {
    let f = fixture();
    let csv = f.anomaly_csv().unwrap();
    let feature = &f.model.features[0];
    let renamed = csv.replacen(feature.as_str(), "Renamed Column", 1);
    assert!(run_monitor(renamed.as_bytes(), &f.model, &MonitorConfig::default(), &mut Vec::new()).is_err());
}

#[test]
fn follow_mode_reads_growing_file() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flows.csv");
    let csv = f.anomaly_csv().unwrap();
    let mut parts = csv.lines();
    let mut file = fs::File::create(&path).unwrap();
    writeln!(file, "{}", parts.next().unwrap()).unwrap();
    writeln!(file, "{}", parts.next().unwrap()).unwrap();
    let rest: Vec<String> = parts.map(String::from).collect();
    let writer = thread::spawn(move || {
        for line in rest {
            thread::sleep(Duration::from_millis(60));
            writeln!(file, "{line}").unwrap();
        }
    });
    let config = MonitorConfig {
        follow: Some(FollowConfig { poll: Duration::from_millis(20), idle_timeout: Duration::from_millis(400) }),
        ..MonitorConfig::default()
    };
    let mut sink = Vec::new();
    let summary = run_monitor(fs::File::open(&path).unwrap(), &f.model, &config, &mut sink).unwrap();
    writer.join().unwrap();
    assert_eq!((summary.total, summary.anomalies), (3, 1));
}

#[test]
fn stage_run_writes_four_logs() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.nidm");
    save_model_file(&f.model, &model).unwrap();
    let specs: Vec<StageSpec> = Stage::ALL
        .iter()
        .zip(f.stage_csvs().unwrap())
        .map(|(&stage, csv)| {
            let input = dir.path().join(format!("{stage}.csv"));
            fs::write(&input, csv).unwrap();
            StageSpec { config: MonitorConfig { stage, ..MonitorConfig::default() }, input }
        })
        .collect();
    let report = stage_run(&model, &specs, dir.path());
    assert_eq!(report.exit_status(), 2);
    for stage in Stage::ALL {
        let log = fs::read_to_string(dir.path().join(format!("{stage}.log"))).unwrap();
        let n = anomaly_lines(&log).len();
        assert_eq!(n, if stage == Stage::Monitor { 3 } else { 0 }, "{stage}");
        assert!(anomaly_lines(&log).iter().all(|e| e.stage == stage));
    }

    // A broken model file at stage 2 stops the run there.
    let specs_broken: Vec<StageSpec> = specs.clone();
    let bad_model = dir.path().join("missing.nidm");
    let out = tempfile::tempdir().unwrap();
    let report = stage_run(&bad_model, &specs_broken, out.path());
    assert_eq!(report.exit_status(), 1);
    assert_eq!(report.stages.len(), 1);
    assert_eq!(report.skipped.len(), 3);
    assert!(fs::read_dir(out.path()).unwrap().next().is_none());
}

#[test]
fn missing_model_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, fixture().clean_csv(2).unwrap()).unwrap();
    let log = dir.path().join("monitor.log");
    assert!(monitor_file(&dir.path().join("nope.nidm"), &input, &MonitorConfig::default(), &log).is_err());
    assert!(!log.exists());
}
