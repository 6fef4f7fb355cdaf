use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// One-vs-rest counts for a single class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// Accuracy, precision, recall and F1 from binary counts. A zero denominator
/// yields 0 and names the affected metric in the returned list.
pub fn binary_metrics(c: BinaryCounts) -> ([f64; 4], Vec<&'static str>) {
    let mut flags = Vec::new();
    let mut ratio = |num: f64, den: f64, name: &'static str| {
        if den == 0.0 {
            flags.push(name);
            0.0
        } else {
            num / den
        }
    };
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let accuracy = ratio(tp + tn, tp + tn + fp + fn_, "accuracy");
    let precision = ratio(tp, tp + fp, "precision");
    let recall = ratio(tp, tp + fn_, "recall");
    let f1 = ratio(2.0 * precision * recall, precision + recall, "f1");
    ([accuracy, precision, recall, f1], flags)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: String,
    pub support: u64,
    pub counts: BinaryCounts,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub classes: Vec<String>,
    /// `confusion[true][predicted]`
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassMetrics>,
    /// `trace / total`
    pub accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    /// `<metric>:<class>` for every zero-denominator metric.
    pub zero_division: Vec<String>,
}

/// Square confusion matrix from parallel truth/prediction class indices.
pub fn confusion_matrix(n_classes: usize, truth: &[usize], predicted: &[usize]) -> Result<Vec<Vec<u64>>> {
    if truth.len() != predicted.len() {
        return Err(Error::Shape("truth and prediction lengths differ".into()));
    }
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::Input(format!("class index outside 0..{n_classes}")));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

impl MetricsReport {
    pub fn from_confusion(classes: Vec<String>, confusion: Vec<Vec<u64>>) -> Result<Self> {
        let c = classes.len();
        if confusion.len() != c || confusion.iter().any(|r| r.len() != c) {
            return Err(Error::Shape(format!("confusion matrix is not {c}x{c}")));
        }
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut per_class = Vec::with_capacity(c);
        let mut zero_division = Vec::new();
        for k in 0..c {
            let tp = confusion[k][k];
            let support: u64 = confusion[k].iter().sum();
            let predicted: u64 = confusion.iter().map(|r| r[k]).sum();
            let counts = BinaryCounts {
                tp,
                fp: predicted - tp,
                fn_: support - tp,
                tn: total + tp - support - predicted,
            };
            let ([accuracy, precision, recall, f1], flags) = binary_metrics(counts);
            zero_division.extend(flags.into_iter().map(|f| format!("{f}:{}", classes[k])));
            per_class.push(ClassMetrics {
                class: classes[k].clone(),
                support,
                counts,
                accuracy,
                precision,
                recall,
                f1,
            });
        }
        let trace: u64 = (0..c).map(|k| confusion[k][k]).sum();
        let weighted = |f: fn(&ClassMetrics) -> f64| {
            per_class.iter().map(|m| m.support as f64 * f(m)).sum::<f64>() / total as f64
        };
        Ok(MetricsReport {
            accuracy: trace as f64 / total as f64,
            weighted_precision: weighted(|m| m.precision),
            weighted_recall: weighted(|m| m.recall),
            weighted_f1: weighted(|m| m.f1),
            classes,
            confusion,
            per_class,
            zero_division,
        })
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialise") + "\n"
    }

    /// Confusion matrix as CSV, true classes down the rows.
    pub fn confusion_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("true\\predicted")
            .chain(self.classes.iter().map(String::as_str))
            .collect();
        w.write_record(&header).expect("in-memory write");
        for (name, row) in self.classes.iter().zip(&self.confusion) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Per-class table followed by the weighted row and overall accuracy.
impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .classes
            .iter()
            .map(String::len)
            .chain(["weighted avg".len()])
            .max()
            .unwrap();
        writeln!(
            f,
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}  {:>8}",
            "class", "accuracy", "precision", "recall", "f1", "support"
        )?;
        for m in &self.per_class {
            writeln!(
                f,
                "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}  {:>8}",
                m.class, m.accuracy, m.precision, m.recall, m.f1, m.support
            )?;
        }
        writeln!(
            f,
            "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}  {:>8}",
            "weighted avg",
            self.accuracy,
            self.weighted_precision,
            self.weighted_recall,
            self.weighted_f1,
            self.total()
        )?;
        if !self.zero_division.is_empty() {
            writeln!(f, "zero-division (reported as 0): {}", self.zero_division.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_binary_example() {
        let ([a, p, r, f1], flags) = binary_metrics(BinaryCounts {
            tp: 50,
            tn: 30,
            fp: 10,
            fn_: 10,
        });
        assert_eq!(a, 0.8);
        assert_eq!(p, 50.0 / 60.0);
        assert_eq!(r, 50.0 / 60.0);
        assert!((f1 - 50.0 / 60.0).abs() < 1e-15);
        assert!(flags.is_empty());
    }

    #[test]
    fn three_class_hand_computed() {
        let m = vec![vec![5, 1, 0], vec![2, 3, 1], vec![0, 0, 4]];
        let r = MetricsReport::from_confusion(vec!["a".into(), "b".into(), "c".into()], m).unwrap();
        // Column sums 7, 4, 5; row sums 6, 6, 4; total 16.
        let p = [5.0 / 7.0, 3.0 / 4.0, 4.0 / 5.0];
        let rc = [5.0 / 6.0, 3.0 / 6.0, 1.0];
        let f1: Vec<f64> = (0..3).map(|k| 2.0 * p[k] * rc[k] / (p[k] + rc[k])).collect();
        let wf1 = (6.0 * f1[0] + 6.0 * f1[1] + 4.0 * f1[2]) / 16.0;
        assert!((r.weighted_f1 - wf1).abs() < 1e-12);
        assert_eq!(r.accuracy, 12.0 / 16.0);
        assert_eq!(r.per_class[1].counts, BinaryCounts { tp: 3, tn: 9, fp: 1, fn_: 3 });
        assert!((r.weighted_recall - r.accuracy).abs() < 1e-12);
    }

    #[test]
    fn empty_predicted_class_is_flagged() {
        let r = MetricsReport::from_confusion(vec!["a".into(), "b".into()], vec![vec![3, 0], vec![1, 0]]).unwrap();
        assert_eq!(r.per_class[1].precision, 0.0);
        assert!(r.zero_division.contains(&"precision:b".to_string()));
        assert!(r.zero_division.contains(&"f1:b".to_string()));
    }

    #[test]
    fn renderings() {
        let r = MetricsReport::from_confusion(vec!["Benign".into(), "DoS".into()], vec![vec![4, 0], vec![0, 2]]).unwrap();
        assert_eq!(r.confusion_csv(), "true\\predicted,Benign,DoS\nBenign,4,0\nDoS,0,2\n");
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["weighted_f1"], 1.0);
        assert_eq!(json["per_class"][0]["counts"]["fn"], 0);
        let text = r.to_string();
        assert!(text.lines().nth(3).unwrap().starts_with("weighted avg"));
    }
}
