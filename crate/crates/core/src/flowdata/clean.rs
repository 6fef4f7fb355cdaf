use std::fmt;

use super::encode::number_text;
use super::{map_labels, parse_flow_csv, CategoricalTable, Cell, Dataset, FlowRecord, LabelMap, Profile};
use crate::error::{Error, Result};

/// Wall-clock and identity columns removed from the feature set. Inter-arrival
/// time statistics (`*IAT*`) are flow features and stay.
pub const DEFAULT_EXCLUDED: &[&str] = &[
    "Timestamp",
    "Flow ID",
    "Src IP",
    "Dst IP",
    "Source IP",
    "Destination IP",
    "Src Port",
    "Source Port",
];

#[derive(Clone, Debug, PartialEq)]
pub struct CleanConfig {
    /// A column is dropped when its fraction of exact zeros is strictly above this.
    pub zero_threshold: f64,
    /// Column names dropped regardless of content (case-insensitive).
    pub excluded: Vec<String>,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            zero_threshold: 0.30,
            excluded: DEFAULT_EXCLUDED.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowReason {
    Missing,
    /// The label rules drop this class.
    Label,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnReason {
    Zeros,
    Excluded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowDrop {
    pub index: usize,
    pub reason: RowReason,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnDrop {
    pub name: String,
    pub reason: ColumnReason,
    /// Zero fraction over the rows that survived row filtering.
    pub zero_fraction: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CleanReport {
    pub rows: Vec<RowDrop>,
    pub columns: Vec<ColumnDrop>,
}

impl fmt::Display for CleanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.columns {
            let reason = match c.reason {
                ColumnReason::Zeros => "zeros",
                ColumnReason::Excluded => "excluded",
            };
            writeln!(f, "DROP-COL {} reason={reason}", c.name)?;
        }
        for r in &self.rows {
            let reason = match r.reason {
                RowReason::Missing => "missing",
                RowReason::Label => "label",
            };
            writeln!(f, "DROP-ROW {} reason={reason}", r.index)?;
        }
        Ok(())
    }
}

/// Drops unusable rows and columns and assembles a [`Dataset`].
///
/// `labels[i]` indexes `class_names` (`None` = dropped by label rule). The
/// output class table keeps only classes that still have rows, in
/// `class_names` order. Text-valued columns are rank-encoded on the spot.
pub fn clean(
    records: &[FlowRecord],
    labels: &[Option<usize>],
    class_names: &[String],
    profile: Profile,
    config: &CleanConfig,
) -> Result<(Dataset, CleanReport)> {
    if !(config.zero_threshold > 0.0 && config.zero_threshold <= 1.0) {
        return Err(Error::Parameter(format!(
            "zero threshold {} outside (0, 1]",
            config.zero_threshold
        )));
    }
    if records.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} records with {} labels",
            records.len(),
            labels.len()
        )));
    }
    let Some(first) = records.first() else {
        return Err(Error::EmptyDataset);
    };
    let columns = first.columns();
    if let Some(r) = records.iter().find(|r| r.columns() != columns) {
        return Err(Error::Schema(format!(
            "record at line {} has a different column set",
            r.line()
        )));
    }

    let mut report = CleanReport::default();
    let mut keep = Vec::with_capacity(records.len());
    for (i, (rec, label)) in records.iter().zip(labels).enumerate() {
        match label {
            None => report.rows.push(RowDrop {
                index: i,
                reason: RowReason::Label,
            }),
            Some(_) if rec.has_missing() => report.rows.push(RowDrop {
                index: i,
                reason: RowReason::Missing,
            }),
            Some(l) if *l >= class_names.len() => {
                return Err(Error::Input(format!("label index {l} out of range")))
            }
            Some(_) => keep.push(i),
        }
    }
    if keep.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let excluded = |name: &str| config.excluded.iter().any(|e| e.eq_ignore_ascii_case(name));
    let mut kept_cols = Vec::new();
    let mut text_cols = Vec::new();
    for (j, name) in columns.iter().enumerate() {
        let is_text = keep
            .iter()
            .any(|&i| matches!(records[i].values()[j], Cell::Text(_)));
        let zeros = if is_text {
            0
        } else {
            keep.iter()
                .filter(|&&i| records[i].values()[j] == Cell::Number(0.0))
                .count()
        };
        let zero_fraction = zeros as f64 / keep.len() as f64;
        let reason = if zero_fraction > config.zero_threshold {
            Some(ColumnReason::Zeros)
        } else if excluded(name) {
            Some(ColumnReason::Excluded)
        } else {
            None
        };
        match reason {
            Some(reason) => report.columns.push(ColumnDrop {
                name: name.clone(),
                reason,
                zero_fraction,
            }),
            None => {
                kept_cols.push(j);
                text_cols.push(is_text);
            }
        }
    }
    if kept_cols.is_empty() {
        return Err(Error::EmptyFeatures);
    }

    let text = |cell: &Cell| match cell {
        Cell::Number(v) => number_text(*v),
        Cell::Text(t) => t.clone(),
        Cell::Missing => unreachable!("missing rows were removed"),
    };
    let mut tables = Vec::new();
    for (&j, _) in kept_cols.iter().zip(&text_cols).filter(|(_, &t)| t) {
        let values: Vec<String> = keep.iter().map(|&i| text(&records[i].values()[j])).collect();
        tables.push(CategoricalTable::from_text(
            &columns[j],
            values.iter().map(String::as_str),
        ));
    }

    let mut data = Vec::with_capacity(keep.len() * kept_cols.len());
    for &i in &keep {
        let values = records[i].values();
        for &j in &kept_cols {
            let v = match &values[j] {
                Cell::Number(v) if !tables.iter().any(|t| t.column == columns[j]) => *v,
                cell => tables
                    .iter()
                    .find(|t| t.column == columns[j])
                    .expect("text column has a table")
                    .code(cell)?,
            };
            data.push(v);
        }
    }

    let mut present: Vec<usize> = keep.iter().map(|&i| labels[i].unwrap()).collect();
    present.sort_unstable();
    present.dedup();
    let names: Vec<String> = present.iter().map(|&c| class_names[c].clone()).collect();
    let compact: Vec<usize> = keep
        .iter()
        .map(|&i| present.binary_search(&labels[i].unwrap()).unwrap())
        .collect();

    let mut dataset = Dataset::from_parts(
        kept_cols.iter().map(|&j| columns[j].clone()).collect(),
        data,
        compact,
        names,
        profile,
        keep.iter().map(|&i| Some(i)).collect(),
    )?;
    dataset.set_encodings(tables);
    Ok((dataset, report))
}

/// Parses a flow CSV, maps its labels through `map` and cleans it. Any
/// malformed row aborts.
pub fn preprocess<R: std::io::Read>(
    source: R,
    map: &LabelMap,
    config: &CleanConfig,
) -> Result<(Dataset, CleanReport)> {
    let table = parse_flow_csv(source)?;
    let labels = map_labels(&table.records, map)?;
    clean(&table.records, &labels, map.classes(), map.profile(), config)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::flowdata::Identity;

    fn records(cols: &[&str], rows: &[Vec<Cell>]) -> Vec<FlowRecord> {
        let cols: Arc<[String]> = cols.iter().map(|s| s.to_string()).collect::<Vec<_>>().into();
        rows.iter()
            .map(|r| FlowRecord::new(Arc::clone(&cols), r.clone(), "x", Identity::default()).unwrap())
            .collect()
    }

    fn n(v: f64) -> Cell {
        Cell::Number(v)
    }

    fn classes() -> Vec<String> {
        vec!["Benign".into(), "DoS".into()]
    }

    #[test]
    fn zero_heavy_feature_dropped() {
        let rows: Vec<Vec<Cell>> = (0..10)
            .map(|i| vec![n(if i < 4 { 0.0 } else { 1.0 }), n(i as f64 + 1.0)])
            .collect();
        let recs = records(&["Z", "K"], &rows);
        let labels = vec![Some(0); 10];
        let (ds, report) =
            clean(&recs, &labels, &classes(), Profile::Custom, &CleanConfig::default()).unwrap();
        assert_eq!(ds.columns(), ["K"]);
        assert_eq!(report.columns.len(), 1);
        assert_eq!(report.columns[0].reason, ColumnReason::Zeros);
        assert!((report.columns[0].zero_fraction - 0.4).abs() < 1e-12);
        assert_eq!(report.to_string(), "DROP-COL Z reason=zeros\n");
    }

    #[test]
    fn exactly_threshold_is_kept() {
        let rows: Vec<Vec<Cell>> = (0..10).map(|i| vec![n(if i < 3 { 0.0 } else { 1.0 })]).collect();
        let (ds, _) = clean(
            &records(&["Z"], &rows),
            &[Some(0); 10],
            &classes(),
            Profile::Custom,
            &CleanConfig::default(),
        )
        .unwrap();
        assert_eq!(ds.n_cols(), 1);
    }

    #[test]
    fn missing_row_removed_and_order_kept() {
        let rows = vec![
            vec![n(1.0)],
            vec![n(2.0)],
            vec![Cell::Missing],
            vec![n(4.0)],
            vec![n(5.0)],
        ];
        let (ds, report) = clean(
            &records(&["A"], &rows),
            &[Some(0), Some(1), Some(0), Some(1), Some(0)],
            &classes(),
            Profile::Custom,
            &CleanConfig::default(),
        )
        .unwrap();
        assert_eq!(ds.n_rows(), 4);
        assert_eq!(ds.values(), [1.0, 2.0, 4.0, 5.0]);
        assert_eq!(ds.labels(), [0, 1, 1, 0]);
        assert_eq!(ds.sources(), [Some(0), Some(1), Some(3), Some(4)]);
        assert_eq!(report.to_string(), "DROP-ROW 2 reason=missing\n");
    }

    #[test]
    fn nothing_to_drop_is_identity() {
        let rows = vec![vec![n(1.0), n(2.0)], vec![n(3.0), n(4.0)]];
        let (ds, report) = clean(
            &records(&["A", "B"], &rows),
            &[Some(0), Some(1)],
            &classes(),
            Profile::Custom,
            &CleanConfig::default(),
        )
        .unwrap();
        assert_eq!(ds.values(), [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ds.columns(), ["A", "B"]);
        assert!(report.rows.is_empty() && report.columns.is_empty());
    }

    #[test]
    fn excluded_columns_and_absent_classes() {
        let rows = vec![vec![n(5000.0), n(2.0)], vec![n(6000.0), n(4.0)]];
        let (ds, report) = clean(
            &records(&["Src Port", "B"], &rows),
            &[Some(1), Some(1)],
            &classes(),
            Profile::Custom,
            &CleanConfig::default(),
        )
        .unwrap();
        assert_eq!(ds.columns(), ["B"]);
        assert_eq!(ds.class_names(), ["DoS"]);
        assert_eq!(ds.labels(), [0, 0]);
        assert_eq!(report.to_string(), "DROP-COL Src Port reason=excluded\n");
    }

    #[test]
    fn empty_outcomes() {
        let rows = vec![vec![Cell::Missing]];
        assert!(matches!(
            clean(&records(&["A"], &rows), &[Some(0)], &classes(), Profile::Custom, &CleanConfig::default()),
            Err(Error::EmptyDataset)
        ));
        let rows = vec![vec![n(0.0)]];
        assert!(matches!(
            clean(&records(&["A"], &rows), &[Some(0)], &classes(), Profile::Custom, &CleanConfig::default()),
            Err(Error::EmptyFeatures)
        ));
        let cfg = CleanConfig {
            zero_threshold: 0.0,
            ..CleanConfig::default()
        };
        assert!(matches!(
            clean(&records(&["A"], &[vec![n(1.0)]]), &[Some(0)], &classes(), Profile::Custom, &cfg),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn text_columns_rank_encoded() {
        let rows = vec![
            vec![Cell::Text("http".into()), n(1.0)],
            vec![Cell::Text("dns".into()), n(2.0)],
            vec![Cell::Text("http".into()), n(3.0)],
        ];
        let (ds, _) = clean(
            &records(&["Service", "B"], &rows),
            &[Some(0); 3],
            &classes(),
            Profile::Custom,
            &CleanConfig::default(),
        )
        .unwrap();
        assert_eq!(ds.column(0), [1.0, 0.0, 1.0]);
        assert_eq!(ds.encodings().len(), 1);
    }

    #[test]
    fn label_dropped_rows_reported() {
        let rows = vec![vec![n(1.0)], vec![n(2.0)]];
        let (ds, report) = clean(
            &records(&["A"], &rows),
            &[None, Some(0)],
            &classes(),
            Profile::Custom,
            &CleanConfig::default(),
        )
        .unwrap();
        assert_eq!(ds.n_rows(), 1);
        assert_eq!(report.to_string(), "DROP-ROW 0 reason=label\n");
    }
}
