//! Deterministic monitoring fixtures: a compact model trained on the
//! synthetic stand-in, and flow files assembled from rows it scores
//! confidently, so the expected verdict of every fixture row is known.

use crate::error::{Error, Result};
use crate::featsel::{ForestParams, RfeParams};
use crate::flowdata::{parse_flow_csv, preprocess, CleanConfig, LabelMap, Profile};
use crate::pipeline::{fit, ConvBlock, FitOptions, ModelConfig, TrainedModel};
use crate::resample::ResampleConfig;
use crate::synth::cic_standin_csv;

/// Minimum confidence of a row picked for a fixture.
pub const PICK_CONFIDENCE: f64 = 0.9;

/// Small architecture that trains in seconds.
pub fn compact_config(seed: u64) -> ModelConfig {
    let block = |filters| ConvBlock {
        filters,
        kernel: 3,
        pool: 2,
    };
    ModelConfig {
        conv: vec![block(8), block(16), block(16)],
        dropout: vec![0.2, 0.3],
        lstm: vec![16, 8],
        epochs: 12,
        batch_size: 32,
        learning_rate: 0.01,
        seed,
    }
}

pub struct MonitorFixture {
    pub model: TrainedModel,
    header: String,
    /// `(line, class index, confidence)` for confidently scored rows.
    picks: Vec<(String, usize, f64)>,
}

impl MonitorFixture {
    /// Trains on `rows` stand-in flows and indexes the confidently scored
    /// ones.
    pub fn build(rows: usize, seed: u64) -> Result<Self> {
        let csv = cic_standin_csv(rows, seed);
        let map = LabelMap::for_profile(Profile::Ids2017)?;
        let (data, _) = preprocess(csv.as_bytes(), &map, &CleanConfig::default())?;
        let options = FitOptions {
            split_seed: seed,
            select: Some(RfeParams {
                target_k: 24,
                step: 8,
                forest: ForestParams {
                    n_trees: 15,
                    seed,
                    ..ForestParams::default()
                },
            }),
            resample: Some(ResampleConfig {
                seed,
                ..ResampleConfig::default()
            }),
            model: compact_config(seed),
            ..FitOptions::default()
        };
        let model = fit(&data, Some(map.source().to_string()), &options)?.model;

        let lines: Vec<&str> = csv.lines().collect();
        let table = parse_flow_csv(csv.as_bytes())?;
        let mut picks = Vec::new();
        for record in &table.records {
            let Ok(Some(truth)) = model.class_of_label(record.raw_label()) else {
                continue;
            };
            let Ok(p) = model.score_record(record) else { continue };
            if p.class == truth && p.confidence >= PICK_CONFIDENCE {
                picks.push((lines[record.line() as usize - 1].to_string(), p.class, p.confidence));
            }
        }
        Ok(MonitorFixture {
            model,
            header: lines[0].to_string(),
            picks,
        })
    }

    pub fn class_index(&self, name: &str) -> Result<usize> {
        self.model
            .class_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    /// The `n` first confidently scored rows of `class`.
    pub fn rows(&self, class: &str, n: usize) -> Result<Vec<String>> {
        let c = self.class_index(class)?;
        let rows: Vec<String> = self
            .picks
            .iter()
            .filter(|(_, k, _)| *k == c)
            .map(|(l, _, _)| l.clone())
            .take(n)
            .collect();
        if rows.len() < n {
            return Err(Error::InsufficientSamples {
                class: class.to_string(),
                rows: rows.len(),
                needed: n,
            });
        }
        Ok(rows)
    }

    /// CSV text: the stand-in header and the given data lines.
    pub fn csv(&self, lines: &[String]) -> String {
        let mut out = self.header.clone();
        out.push('\n');
        for l in lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }

    /// Benign, DoS, Benign.
    pub fn anomaly_csv(&self) -> Result<String> {
        let benign = self.rows("Benign", 2)?;
        let dos = self.rows("DoS", 1)?;
        Ok(self.csv(&[benign[0].clone(), dos[0].clone(), benign[1].clone()]))
    }

    /// `n` Benign flows.
    pub fn clean_csv(&self, n: usize) -> Result<String> {
        Ok(self.csv(&self.rows("Benign", n)?))
    }

    /// Inputs for build, test, deploy and monitor: the first three clean,
    /// the last mixing Benign flows with DoS, DDoS and Portscan.
    pub fn stage_csvs(&self) -> Result<[String; 4]> {
        let benign = self.rows("Benign", 20)?;
        let mut monitor = benign[15..].to_vec();
        monitor.insert(1, self.rows("DoS", 2)?[1].clone());
        monitor.insert(3, self.rows("DDoS", 1)?[0].clone());
        monitor.push(self.rows("Portscan", 1)?[0].clone());
        Ok([
            self.csv(&benign[..5]),
            self.csv(&benign[5..10]),
            self.csv(&benign[10..15]),
            self.csv(&monitor),
        ])
    }
}
