//! Per-class and support-weighted metrics from a confusion matrix.
//!
//! cargo run --example metrics_report

use nids_core::pipeline::{binary_metrics, BinaryCounts, MetricsReport};

fn main() -> nids_core::Result<()> {
    let ([accuracy, precision, recall, f1], _) = binary_metrics(BinaryCounts {
        tp: 50,
        tn: 30,
        fp: 10,
        fn_: 10,
    });
    println!("binary: accuracy {accuracy:.4} precision {precision:.4} recall {recall:.4} f1 {f1:.4}");

    let classes = ["Benign", "DoS", "Portscan"].map(String::from).to_vec();
    let confusion = vec![vec![950, 30, 20], vec![12, 180, 8], vec![5, 0, 45]];
    let report = MetricsReport::from_confusion(classes, confusion)?;
    println!("{report}");
    print!("{}", report.confusion_csv());
    Ok(())
}
