use std::collections::BTreeMap;
use std::fmt;

use super::{enn_removals, smote_samples};
use crate::error::{Error, Result};
use crate::flowdata::Dataset;
use crate::rng::derive_seed;

#[derive(Clone, Debug, PartialEq)]
pub enum SmoteTarget {
    /// Raise every class to the largest class count.
    Auto,
    /// Per-class target as a fraction of the largest class count; classes not
    /// listed are left as they are.
    Ratios(BTreeMap<String, f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResampleConfig {
    pub smote_k: usize,
    pub target: SmoteTarget,
    pub enn_k: usize,
    pub seed: u64,
}

impl Default for ResampleConfig {
    fn default() -> Self {
        ResampleConfig {
            smote_k: 5,
            target: SmoteTarget::Auto,
            enn_k: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCounts {
    pub class: String,
    pub before: usize,
    pub after_smote: usize,
    pub after_enn: usize,
    /// Eligible for ENN pruning (pre-SMOTE share above 1/C).
    pub prunable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResampleReport {
    pub classes: Vec<ClassCounts>,
}

fn percent(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

fn imbalance(counts: impl Iterator<Item = usize>) -> f64 {
    let counts: Vec<usize> = counts.filter(|&c| c > 0).collect();
    match (counts.iter().max(), counts.iter().min()) {
        (Some(&hi), Some(&lo)) => hi as f64 / lo as f64,
        _ => 1.0,
    }
}

impl ResampleReport {
    pub fn imbalance_before(&self) -> f64 {
        imbalance(self.classes.iter().map(|c| c.before))
    }

    pub fn imbalance_after(&self) -> f64 {
        imbalance(self.classes.iter().map(|c| c.after_enn))
    }

    pub fn total_before(&self) -> usize {
        self.classes.iter().map(|c| c.before).sum()
    }

    pub fn total_after(&self) -> usize {
        self.classes.iter().map(|c| c.after_enn).sum()
    }
}

/// Class / before % / after % table.
impl fmt::Display for ResampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .classes
            .iter()
            .map(|c| c.class.len())
            .chain(["Total rows".len()])
            .max()
            .unwrap_or(10);
        let (before, after) = (self.total_before(), self.total_after());
        writeln!(f, "{:<width$}  {:>21}  {:>20}", "Class", "Before Resampling (%)", "After Resampling (%)")?;
        for c in &self.classes {
            writeln!(
                f,
                "{:<width$}  {:>21.2}  {:>20.2}",
                c.class,
                percent(c.before, before),
                percent(c.after_enn, after)
            )?;
        }
        writeln!(f, "{:<width$}  {:>21}  {:>20}", "Total rows", before, after)
    }
}

/// SMOTE every class below its target, then ENN-prune the classes whose
/// pre-SMOTE share exceeds 1/C.
///
/// ENN removals are capped per class so that no class falls below
/// `ceil(largest_after_smote / imbalance_before)` rows; the output imbalance
/// ratio therefore never exceeds the input's. When the cap binds, rows with
/// more disagreeing neighbours go first (lower index on ties).
pub fn resample_pipeline(train: &Dataset, config: &ResampleConfig) -> Result<(Dataset, ResampleReport)> {
    let counts = train.class_counts();
    let present = counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::Input(format!(
            "resampling needs at least 2 classes, found {present}"
        )));
    }
    let names = train.class_names();
    let largest = *counts.iter().max().unwrap();
    let targets: Vec<usize> = match &config.target {
        SmoteTarget::Auto => counts.iter().map(|&c| if c > 0 { largest } else { 0 }).collect(),
        SmoteTarget::Ratios(ratios) => {
            if let Some(bad) = ratios.keys().find(|k| !names.contains(k)) {
                return Err(Error::Parameter(format!("resample target for unknown class {bad:?}")));
            }
            names
                .iter()
                .zip(&counts)
                .map(|(name, &c)| match ratios.get(name) {
                    Some(&r) if c > 0 => c.max((r * largest as f64).round() as usize),
                    _ => c,
                })
                .collect()
        }
    };

    let width = train.n_cols();
    let mut data = train.values().to_vec();
    let mut labels = train.labels().to_vec();
    let mut sources = train.sources().to_vec();
    for (class, (&have, &want)) in counts.iter().zip(&targets).enumerate() {
        if want <= have {
            continue;
        }
        let mut rows = Vec::with_capacity(have * width);
        for (row, &l) in train.rows().zip(train.labels()) {
            if l == class {
                rows.extend_from_slice(row);
            }
        }
        let samples = smote_samples(&rows, width, config.smote_k, want - have, derive_seed(config.seed, class as u64))
            .map_err(|e| match e {
                Error::InsufficientSamples { rows, needed, .. } => Error::InsufficientSamples {
                    class: names[class].clone(),
                    rows,
                    needed,
                },
                other => other,
            })?;
        for s in samples {
            data.extend_from_slice(&s.row);
            labels.push(class);
            sources.push(None);
        }
    }

    let mut after_smote = vec![0usize; names.len()];
    for &l in &labels {
        after_smote[l] += 1;
    }
    let total_before: usize = counts.iter().sum();
    let prunable: Vec<bool> = counts
        .iter()
        .map(|&c| c as f64 / total_before as f64 > 1.0 / present as f64)
        .collect();

    let verdicts = enn_removals(&data, width, &labels, config.enn_k, &prunable)?;
    let ir_before = imbalance(counts.iter().copied());
    let largest_after = *after_smote.iter().max().unwrap();
    let floor = (largest_after as f64 / ir_before).ceil() as usize;

    let mut remove = vec![false; labels.len()];
    for (class, &size) in after_smote.iter().enumerate() {
        let mut candidates: Vec<(usize, usize)> = verdicts
            .iter()
            .enumerate()
            .filter(|&(i, _)| labels[i] == class)
            .filter_map(|(i, v)| v.map(|d| (i, d)))
            .collect();
        let allowed = size.saturating_sub(floor);
        if candidates.len() > allowed {
            candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            candidates.truncate(allowed);
        }
        for (i, _) in candidates {
            remove[i] = true;
        }
    }

    let keep: Vec<usize> = (0..labels.len()).filter(|&i| !remove[i]).collect();
    let mut out_data = Vec::with_capacity(keep.len() * width);
    for &i in &keep {
        out_data.extend_from_slice(&data[i * width..(i + 1) * width]);
    }
    let out_labels: Vec<usize> = keep.iter().map(|&i| labels[i]).collect();
    let out_sources = keep.iter().map(|&i| sources[i]).collect();
    let out = train.with_rows(out_data, out_labels, out_sources)?;

    let after_enn = out.class_counts();
    let report = ResampleReport {
        classes: (0..names.len())
            .map(|c| ClassCounts {
                class: names[c].clone(),
                before: counts[c],
                after_smote: after_smote[c],
                after_enn: after_enn[c],
                prunable: prunable[c],
            })
            .collect(),
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use rand::Rng as _;

    use super::*;
    use crate::flowdata::Profile;
    use crate::rng::seeded;

    fn two_class(n0: usize, n1: usize, seed: u64) -> Dataset {
        let mut rng = seeded(seed);
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (class, n, centre) in [(0, n0, 0.3), (1, n1, 0.6)] {
            for _ in 0..n {
                data.push(centre + rng.random_range(-0.2..0.2));
                data.push(centre + rng.random_range(-0.2..0.2));
                labels.push(class);
            }
        }
        Dataset::new(
            vec!["a".into(), "b".into()],
            data,
            labels,
            vec!["Benign".into(), "Bot".into()],
            Profile::Custom,
        )
        .unwrap()
    }

    #[test]
    fn ninety_ten() {
        let d = two_class(90, 10, 1);
        let (out, report) = resample_pipeline(&d, &ResampleConfig::default()).unwrap();
        assert_eq!(report.classes[0].after_smote, 90);
        assert_eq!(report.classes[1].after_smote, 90);
        assert!(report.imbalance_after() <= 9.0);
        assert!(report.imbalance_after() <= report.imbalance_before());
        assert_eq!(out.class_counts(), [report.classes[0].after_enn, report.classes[1].after_enn]);
        // The minority class is protected.
        assert_eq!(report.classes[1].after_enn, 90);
        assert!(out.sources()[..report.classes[0].after_enn].iter().all(Option::is_some));
    }

    #[test]
    fn balanced_input_gets_no_synthetics() {
        let d = two_class(20, 20, 2);
        let (out, report) = resample_pipeline(&d, &ResampleConfig::default()).unwrap();
        assert!(report.classes.iter().all(|c| c.after_smote == c.before));
        assert!(out.sources().iter().all(Option::is_some));
    }

    #[test]
    fn deterministic() {
        let d = two_class(60, 8, 3);
        let cfg = ResampleConfig {
            seed: 42,
            ..ResampleConfig::default()
        };
        assert_eq!(resample_pipeline(&d, &cfg).unwrap(), resample_pipeline(&d, &cfg).unwrap());
    }

    #[test]
    fn single_class_rejected() {
        let d = two_class(10, 0, 3);
        assert!(matches!(resample_pipeline(&d, &ResampleConfig::default()), Err(Error::Input(_))));
    }

    #[test]
    fn insufficient_minority_names_class() {
        let d = two_class(30, 3, 3);
        match resample_pipeline(&d, &ResampleConfig::default()) {
            Err(Error::InsufficientSamples { class, .. }) => assert_eq!(class, "Bot"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ratio_targets() {
        let d = two_class(80, 10, 4);
        let cfg = ResampleConfig {
            target: SmoteTarget::Ratios([("Bot".to_string(), 0.5)].into()),
            ..ResampleConfig::default()
        };
        let (_, report) = resample_pipeline(&d, &cfg).unwrap();
        assert_eq!(report.classes[1].after_smote, 40);
    }

    #[test]
    fn report_table() {
        let report = ResampleReport {
            classes: vec![
                ClassCounts {
                    class: "Benign".into(),
                    before: 90,
                    after_smote: 90,
                    after_enn: 90,
                    prunable: true,
                },
                ClassCounts {
                    class: "Bot".into(),
                    before: 10,
                    after_smote: 90,
                    after_enn: 90,
                    prunable: false,
                },
            ],
        };
        let text = report.to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("Class"));
        assert!(lines[1].starts_with("Benign") && lines[1].contains("90.00") && lines[1].ends_with("50.00"));
        assert!(lines[2].contains("10.00"));
    }
}
