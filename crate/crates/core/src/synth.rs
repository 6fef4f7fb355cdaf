//! Seeded synthetic data: the CIC-IDS2017-shaped stand-in flow export used
//! when the real captures are unavailable, and small generators with known
//! ground truth for testing feature selection and training.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::flowdata::{Dataset, Profile};
use crate::rng::{seeded, Rng};

/// `n_informative` class-dependent features interleaved (seeded order) with
/// `n_noise` standard-normal features; three classes in equal shares.
///
/// Informative columns are named `informative_<i>`, noise `noise_<i>`.
pub fn informative_dataset(n_rows: usize, n_informative: usize, n_noise: usize, seed: u64) -> Dataset {
    let mut rng = seeded(seed);
    let classes = 3;
    let normal = Normal::new(0.0, 1.0).unwrap();
    // Each informative feature orders the class means by its own permutation,
    // spaced 1.5 standard deviations apart.
    let shifts: Vec<Vec<f64>> = (0..n_informative)
        .map(|_| {
            let mut order: Vec<usize> = (0..classes).collect();
            order.shuffle(&mut rng);
            order.iter().map(|&p| 1.5 * (p as f64 - 1.0)).collect()
        })
        .collect();

    let mut layout: Vec<(bool, usize)> = (0..n_informative)
        .map(|i| (true, i))
        .chain((0..n_noise).map(|i| (false, i)))
        .collect();
    layout.shuffle(&mut rng);

    let mut data = Vec::with_capacity(n_rows * layout.len());
    let mut labels = Vec::with_capacity(n_rows);
    for row in 0..n_rows {
        let c = row % classes;
        for &(informative, i) in &layout {
            let base = if informative { shifts[i][c] } else { 0.0 };
            data.push(base + normal.sample(&mut rng));
        }
        labels.push(c);
    }
    let columns = layout
        .iter()
        .map(|&(inf, i)| {
            if inf {
                format!("informative_{i}")
            } else {
                format!("noise_{i}")
            }
        })
        .collect();
    Dataset::new(
        columns,
        data,
        labels,
        vec!["A".into(), "B".into(), "C".into()],
        Profile::Custom,
    )
    .expect("generator output is well formed")
}

/// Two Gaussian blobs in `n_features` dimensions, linearly separable with
/// margin: class 0 centred at 0.3, class 1 at 0.7 (values clipped to [0, 1]).
pub fn separable_blobs(n_rows: usize, n_features: usize, seed: u64) -> Dataset {
    let mut rng = seeded(seed);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut data = Vec::with_capacity(n_rows * n_features);
    let mut labels = Vec::with_capacity(n_rows);
    for row in 0..n_rows {
        let c = row % 2;
        let centre: f64 = if c == 0 { 0.3 } else { 0.7 };
        for _ in 0..n_features {
            data.push((centre + noise.sample(&mut rng)).clamp(0.0, 1.0));
        }
        labels.push(c);
    }
    Dataset::new(
        (0..n_features).map(|j| format!("f{j}")).collect(),
        data,
        labels,
        vec!["Benign".into(), "DoS".into()],
        Profile::Custom,
    )
    .expect("generator output is well formed")
}

struct ClassProfile {
    labels: &'static [&'static str],
    /// Share of rows, percent.
    share: f64,
    log_duration: f64,
    log_fwd: f64,
    log_bwd: f64,
    fwd_len: f64,
    bwd_len: f64,
    tcp: f64,
    ports: &'static [u16],
    win_fwd: &'static [i64],
    win_bwd: &'static [i64],
    psh: f64,
    syn: f64,
    ack: f64,
}

// Shares follow the CIC-IDS2017 class mix before resampling.
const PROFILES: &[ClassProfile] = &[
    ClassProfile {
        labels: &["BENIGN"],
        share: 26.0,
        log_duration: 11.0,
        log_fwd: 1.6,
        log_bwd: 1.5,
        fwd_len: 180.0,
        bwd_len: 420.0,
        tcp: 0.7,
        ports: &[53, 80, 443, 123, 137, 8080, 3268],
        win_fwd: &[-1, 8192, 65535, 29200],
        win_bwd: &[-1, 252, 65160],
        psh: 0.35,
        syn: 0.05,
        ack: 0.4,
    },
    ClassProfile {
        labels: &["DoS Hulk", "DoS GoldenEye", "DoS slowloris", "DoS Slowhttptest"],
        share: 24.0,
        log_duration: 14.5,
        log_fwd: 1.9,
        log_bwd: 1.4,
        fwd_len: 320.0,
        bwd_len: 1300.0,
        tcp: 1.0,
        ports: &[80],
        win_fwd: &[29200, 251],
        win_bwd: &[235, 227],
        psh: 0.1,
        syn: 0.0,
        ack: 0.9,
    },
    ClassProfile {
        labels: &["DDoS"],
        share: 22.0,
        log_duration: 13.0,
        log_fwd: 1.3,
        log_bwd: 1.7,
        fwd_len: 8.0,
        bwd_len: 1050.0,
        tcp: 1.0,
        ports: &[80],
        win_fwd: &[8192, 256],
        win_bwd: &[229],
        psh: 0.0,
        syn: 0.0,
        ack: 0.1,
    },
    ClassProfile {
        labels: &[
            "Web Attack \u{FFFD} Brute Force",
            "Web Attack \u{FFFD} XSS",
            "Web Attack \u{FFFD} Sql Injection",
        ],
        share: 19.0,
        log_duration: 15.5,
        log_fwd: 2.2,
        log_bwd: 2.0,
        fwd_len: 640.0,
        bwd_len: 700.0,
        tcp: 1.0,
        ports: &[80],
        win_fwd: &[29200],
        win_bwd: &[28960],
        psh: 0.8,
        syn: 0.0,
        ack: 0.2,
    },
    ClassProfile {
        labels: &["PortScan"],
        share: 7.0,
        log_duration: 3.8,
        log_fwd: 0.0,
        log_bwd: 0.0,
        fwd_len: 2.0,
        bwd_len: 6.0,
        tcp: 1.0,
        ports: &[],
        win_fwd: &[1024, 29200],
        win_bwd: &[0],
        psh: 0.0,
        syn: 0.9,
        ack: 0.0,
    },
    ClassProfile {
        labels: &["Bot"],
        share: 1.0,
        log_duration: 10.2,
        log_fwd: 1.4,
        log_bwd: 1.1,
        fwd_len: 220.0,
        bwd_len: 130.0,
        tcp: 1.0,
        ports: &[8080],
        win_fwd: &[8192],
        win_bwd: &[237],
        psh: 0.6,
        syn: 0.0,
        ack: 0.3,
    },
    ClassProfile {
        labels: &["FTP-Patator", "SSH-Patator"],
        share: 1.0,
        log_duration: 12.5,
        log_fwd: 2.5,
        log_bwd: 2.6,
        fwd_len: 20.0,
        bwd_len: 40.0,
        tcp: 1.0,
        ports: &[21, 22],
        win_fwd: &[29200],
        win_bwd: &[227, 247],
        psh: 0.7,
        syn: 0.0,
        ack: 0.1,
    },
];

/// Feature columns of the stand-in export, after the identity columns.
pub const STANDIN_FEATURES: &[&str] = &[
    "Destination Port",
    "Protocol",
    "Flow Duration",
    "Total Fwd Packets",
    "Total Backward Packets",
    "Total Length of Fwd Packets",
    "Total Length of Bwd Packets",
    "Fwd Packet Length Max",
    "Fwd Packet Length Min",
    "Fwd Packet Length Mean",
    "Fwd Packet Length Std",
    "Bwd Packet Length Max",
    "Bwd Packet Length Min",
    "Bwd Packet Length Mean",
    "Bwd Packet Length Std",
    "Flow Bytes/s",
    "Flow Packets/s",
    "Flow IAT Mean",
    "Flow IAT Std",
    "Flow IAT Max",
    "Flow IAT Min",
    "Fwd IAT Total",
    "Fwd IAT Mean",
    "Bwd IAT Total",
    "Bwd IAT Mean",
    "Fwd PSH Flags",
    "Fwd URG Flags",
    "Fwd Header Length",
    "Bwd Header Length",
    "Fwd Packets/s",
    "Bwd Packets/s",
    "Min Packet Length",
    "Max Packet Length",
    "Packet Length Mean",
    "Packet Length Std",
    "Packet Length Variance",
    "FIN Flag Count",
    "SYN Flag Count",
    "RST Flag Count",
    "PSH Flag Count",
    "ACK Flag Count",
    "URG Flag Count",
    "CWE Flag Count",
    "ECE Flag Count",
    "Down/Up Ratio",
    "Average Packet Size",
    "Avg Fwd Segment Size",
    "Avg Bwd Segment Size",
    "Subflow Fwd Packets",
    "Subflow Fwd Bytes",
    "Subflow Bwd Packets",
    "Subflow Bwd Bytes",
    "Init_Win_bytes_forward",
    "Init_Win_bytes_backward",
    "act_data_pkt_fwd",
    "min_seg_size_forward",
    "Active Mean",
    "Idle Mean",
];

const IDENTITY_HEADER: &str = "Flow ID,Source IP,Source Port,Destination IP,Timestamp";

/// Writes a CIC-IDS2017-style CSV of `n_rows` synthetic flows.
///
/// Class counts follow the 2017 class mix (largest-remainder rounding); a
/// handful of rows carry `Infinity` rate cells or an `Infiltration` label so
/// the cleaning rules have something to remove.
pub fn cic_standin_csv(n_rows: usize, seed: u64) -> String {
    let mut rng = seeded(seed);
    let counts = class_counts(n_rows);
    let mut plan: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &k)| std::iter::repeat_n(c, k))
        .collect();
    plan.shuffle(&mut rng);

    let mut out = String::with_capacity(n_rows * 400);
    out.push_str(IDENTITY_HEADER);
    for name in STANDIN_FEATURES {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",Label\n");
    for (i, &c) in plan.iter().enumerate() {
        write_flow(&mut out, &mut rng, i, &PROFILES[c]);
    }
    out
}

fn class_counts(n_rows: usize) -> Vec<usize> {
    let total: f64 = PROFILES.iter().map(|p| p.share).sum();
    let exact: Vec<f64> = PROFILES.iter().map(|p| p.share / total * n_rows as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest: Vec<usize> = (0..counts.len()).collect();
    rest.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let missing = n_rows - counts.iter().sum::<usize>();
    for &c in rest.iter().take(missing) {
        counts[c] += 1;
    }
    counts
}

fn pick<T: Copy>(rng: &mut Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

fn write_flow(out: &mut String, rng: &mut Rng, index: usize, p: &ClassProfile) {
    let g = |rng: &mut Rng| -> f64 { rng.sample(StandardNormal) };

    let tcp = rng.random::<f64>() < p.tcp;
    let protocol = if tcp { 6 } else { 17 };
    let dst_port = if p.ports.is_empty() {
        rng.random_range(1..10_000u16)
    } else {
        pick(rng, p.ports)
    };
    let src_port = rng.random_range(1024..65535u16);
    let src_ip = format!("192.168.10.{}", rng.random_range(2..250));
    let dst_ip = format!("172.16.0.{}", rng.random_range(1..20));

    // Roughly one flow in 200 has zero duration; its rate columns become Infinity.
    let zero_duration = rng.random::<f64>() < 0.005;
    let duration = if zero_duration {
        0.0
    } else {
        (p.log_duration + 0.6 * g(rng)).exp().round().max(1.0)
    };
    let fwd = (p.log_fwd + 0.35 * g(rng)).exp().round().max(1.0);
    let bwd = (p.log_bwd + 0.35 * g(rng)).exp().round().max(0.0);
    let fwd_mean = (p.fwd_len * (1.0 + 0.15 * g(rng))).clamp(0.0, 1460.0);
    let bwd_mean = if bwd > 0.0 {
        (p.bwd_len * (1.0 + 0.15 * g(rng))).clamp(0.0, 1460.0)
    } else {
        0.0
    };
    let fwd_std = fwd_mean * (0.2 + 0.05 * g(rng)).abs();
    let bwd_std = bwd_mean * (0.2 + 0.05 * g(rng)).abs();
    let fwd_max = (fwd_mean + 2.0 * fwd_std).min(1460.0);
    let fwd_min = (fwd_mean - 2.0 * fwd_std).max(0.0);
    let bwd_max = (bwd_mean + 2.0 * bwd_std).min(1460.0);
    let bwd_min = (bwd_mean - 2.0 * bwd_std).max(0.0);
    let fwd_bytes = (fwd * fwd_mean).round();
    let bwd_bytes = (bwd * bwd_mean).round();
    let packets = fwd + bwd;
    let seconds = duration / 1e6;
    let rate = |x: f64| if duration == 0.0 { f64::INFINITY } else { x / seconds };
    let iat_mean = duration / (packets - 1.0).max(1.0);
    let iat_std = iat_mean * (0.5 + 0.1 * g(rng)).abs();
    let iat_max = (iat_mean + 2.0 * iat_std).min(duration);
    let iat_min = (iat_mean - iat_std).max(0.0).min(iat_max);
    let fwd_iat_total = duration * (0.9 + 0.05 * g(rng)).clamp(0.0, 1.0);
    let bwd_iat_total = if bwd > 1.0 {
        duration * (0.8 + 0.05 * g(rng)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let pkt_mean = (fwd_bytes + bwd_bytes) / packets;
    let pkt_std = (fwd_std + bwd_std) / 2.0 + (fwd_mean - bwd_mean).abs() / 2.0;
    let flag = |rng: &mut Rng, prob: f64| if rng.random::<f64>() < prob { 1.0 } else { 0.0 };
    let psh = flag(rng, p.psh);
    let syn = flag(rng, p.syn);
    let ack = flag(rng, p.ack);
    let fin = flag(rng, 0.1);
    let urg = flag(rng, 0.02);
    let win_fwd = pick(rng, p.win_fwd) as f64;
    let win_bwd = pick(rng, p.win_bwd) as f64;
    let header = if tcp { 32.0 } else { 8.0 };
    let act_data = (fwd - 1.0).max(0.0).min((fwd_bytes / 10.0).ceil());
    let active = if rng.random::<f64>() < 0.2 {
        duration * 0.3
    } else {
        0.0
    };
    let idle = if rng.random::<f64>() < 0.2 {
        duration * 0.6
    } else {
        0.0
    };

    let label = pick(rng, p.labels);
    let label = if rng.random::<f64>() < 0.001 {
        "Infiltration"
    } else {
        label
    };

    let seconds_of_day = 8 * 3600 + (index as u64 / 4) % (9 * 3600);
    let _ = write!(
        out,
        "{src_ip}-{dst_ip}-{src_port}-{dst_port}-{protocol},{src_ip},{src_port},{dst_ip},07/07/2017 {:02}:{:02}:{:02}",
        seconds_of_day / 3600,
        (seconds_of_day / 60) % 60,
        seconds_of_day % 60
    );
    let values = [
        dst_port as f64,
        protocol as f64,
        duration,
        fwd,
        bwd,
        fwd_bytes,
        bwd_bytes,
        fwd_max,
        fwd_min,
        fwd_mean,
        fwd_std,
        bwd_max,
        bwd_min,
        bwd_mean,
        bwd_std,
        rate(fwd_bytes + bwd_bytes),
        rate(packets),
        iat_mean,
        iat_std,
        iat_max,
        iat_min,
        fwd_iat_total,
        fwd_iat_total / fwd.max(1.0),
        bwd_iat_total,
        bwd_iat_total / bwd.max(1.0),
        psh,
        0.0,
        fwd * header,
        bwd * header,
        rate(fwd),
        rate(bwd),
        fwd_min.min(if bwd > 0.0 { bwd_min } else { fwd_min }),
        fwd_max.max(bwd_max),
        pkt_mean,
        pkt_std,
        pkt_std * pkt_std,
        fin,
        syn,
        0.0,
        psh,
        ack,
        urg,
        0.0,
        0.0,
        (bwd / fwd).floor(),
        pkt_mean * packets / (packets - 1.0).max(1.0),
        fwd_mean,
        bwd_mean,
        fwd,
        fwd_bytes,
        bwd,
        bwd_bytes,
        win_fwd,
        win_bwd,
        act_data,
        if tcp { 20.0 } else { 8.0 },
        active,
        idle,
    ];
    debug_assert_eq!(values.len(), STANDIN_FEATURES.len());
    for v in values {
        if v.is_infinite() {
            out.push_str(",Infinity");
        } else {
            let _ = write!(out, ",{}", round6(v));
        }
    }
    out.push(',');
    out.push_str(label);
    out.push('\n');
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdata::{clean, map_labels, parse_flow_csv, CleanConfig, LabelMap};

    #[test]
    fn standin_parses_and_cleans() {
        let csv = cic_standin_csv(2000, 4);
        let table = parse_flow_csv(csv.as_bytes()).unwrap();
        assert_eq!(table.records.len(), 2000);
        let map = LabelMap::for_profile(Profile::Ids2017).unwrap();
        let labels = map_labels(&table.records, &map).unwrap();
        let (ds, report) = clean(
            &table.records,
            &labels,
            map.classes(),
            Profile::Ids2017,
            &CleanConfig::default(),
        )
        .unwrap();
        assert_eq!(ds.class_names().len(), 7);
        assert!(ds.n_cols() >= 30, "{} columns survive", ds.n_cols());
        assert!(ds.n_rows() > 1950);
        assert!(!report.columns.is_empty());
        assert!(report.rows.iter().any(|r| r.reason == crate::flowdata::RowReason::Missing));
    }

    #[test]
    fn shares_sum() {
        assert_eq!(class_counts(20_000).iter().sum::<usize>(), 20_000);
        assert_eq!(class_counts(20_000)[0], 5200);
    }

    #[test]
    fn deterministic() {
        assert_eq!(cic_standin_csv(50, 1), cic_standin_csv(50, 1));
        assert_eq!(informative_dataset(30, 2, 2, 9), informative_dataset(30, 2, 2, 9));
    }
}
