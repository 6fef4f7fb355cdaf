use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Cell, Dataset};
use crate::error::{Error, Result};

/// One distinct raw value of a categorical column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Level {
    Number(f64),
    Text(String),
}

impl Level {
    fn cmp_sorted(&self, other: &Level) -> Ordering {
        match (self, other) {
            (Level::Number(a), Level::Number(b)) => a.total_cmp(b),
            (Level::Text(a), Level::Text(b)) => a.cmp(b),
            (Level::Number(_), Level::Text(_)) => Ordering::Less,
            (Level::Text(_), Level::Number(_)) => Ordering::Greater,
        }
    }
}

/// Rank encoding for one column: `levels[code]` is the raw value that maps
/// to `code`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalTable {
    pub column: String,
    pub levels: Vec<Level>,
}

/// Textual form a number takes when it shares a column with text cells.
pub(crate) fn number_text(v: f64) -> String {
    v.to_string()
}

impl CategoricalTable {
    /// Lexicographically ranked table over text values.
    pub(crate) fn from_text<'a>(column: &str, values: impl IntoIterator<Item = &'a str>) -> Self {
        let mut levels: Vec<&str> = values.into_iter().collect();
        levels.sort_unstable();
        levels.dedup();
        CategoricalTable {
            column: column.to_string(),
            levels: levels.into_iter().map(|s| Level::Text(s.to_string())).collect(),
        }
    }

    fn is_text(&self) -> bool {
        self.levels.iter().any(|l| matches!(l, Level::Text(_)))
    }

    /// Code for a raw cell; unseen values are an error.
    pub fn code(&self, cell: &Cell) -> Result<f64> {
        let unknown = |value: String| Error::UnknownCategory {
            column: self.column.clone(),
            value,
        };
        let position = match cell {
            Cell::Missing => return Err(unknown("<missing>".into())),
            Cell::Number(v) if self.is_text() => {
                let t = number_text(*v);
                self.levels
                    .iter()
                    .position(|l| matches!(l, Level::Text(s) if *s == t))
            }
            Cell::Number(v) => self
                .levels
                .iter()
                .position(|l| matches!(l, Level::Number(x) if x == v)),
            Cell::Text(t) => self
                .levels
                .iter()
                .position(|l| matches!(l, Level::Text(s) if s == t)),
        };
        position.map(|p| p as f64).ok_or_else(|| {
            unknown(match cell {
                Cell::Number(v) => number_text(*v),
                Cell::Text(t) => t.clone(),
                Cell::Missing => unreachable!(),
            })
        })
    }

    /// Encodes the raw numeric values of this column in `dataset`.
    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        let j = dataset
            .column_index(&self.column)
            .ok_or_else(|| Error::UnknownColumn(self.column.clone()))?;
        let w = dataset.n_cols();
        let mut data = dataset.values().to_vec();
        for i in 0..dataset.n_rows() {
            data[i * w + j] = self.code(&Cell::Number(data[i * w + j]))?;
        }
        let mut out = dataset.with_values(data)?;
        let mut tables: Vec<CategoricalTable> = out
            .encodings()
            .iter()
            .filter(|t| t.column != self.column)
            .cloned()
            .collect();
        tables.push(self.clone());
        out.set_encodings(tables);
        Ok(out)
    }
}

/// Replaces each named column's values by their sorted rank and records the
/// table in the dataset. A column that already carries a table is re-ranked
/// over its present codes and the tables are composed.
pub fn encode_categorical<S: AsRef<str>>(dataset: &Dataset, columns: &[S]) -> Result<Dataset> {
    let mut data = dataset.values().to_vec();
    let mut tables = dataset.encodings().to_vec();
    let w = dataset.n_cols();
    for name in columns {
        let name = name.as_ref();
        let j = dataset
            .column_index(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        let mut distinct: Vec<f64> = (0..dataset.n_rows()).map(|i| data[i * w + j]).collect();
        distinct.sort_unstable_by(f64::total_cmp);
        distinct.dedup();

        let existing = tables.iter().position(|t| t.column == name);
        let levels: Vec<Level> = match existing {
            Some(t) => distinct
                .iter()
                .map(|&c| tables[t].levels[c as usize].clone())
                .collect(),
            None => distinct.iter().map(|&v| Level::Number(v)).collect(),
        };
        debug_assert!(levels.windows(2).all(|p| p[0].cmp_sorted(&p[1]) == Ordering::Less));

        for i in 0..dataset.n_rows() {
            let v = data[i * w + j];
            let rank = distinct
                .binary_search_by(|probe| probe.total_cmp(&v))
                .expect("value drawn from the column");
            data[i * w + j] = rank as f64;
        }
        let table = CategoricalTable {
            column: name.to_string(),
            levels,
        };
        match existing {
            Some(t) => tables[t] = table,
            None => tables.push(table),
        }
    }
    let mut out = dataset.with_values(data)?;
    out.set_encodings(tables);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdata::Profile;

    fn ds(values: Vec<f64>) -> Dataset {
        let n = values.len();
        Dataset::new(
            vec!["Protocol".into()],
            values,
            vec![0; n],
            vec!["Benign".into()],
            Profile::Custom,
        )
        .unwrap()
    }

    #[test]
    fn protocol_ranks() {
        let out = encode_categorical(&ds(vec![17.0, 6.0, 0.0, 6.0]), &["Protocol"]).unwrap();
        assert_eq!(out.values(), [2.0, 1.0, 0.0, 1.0]);
        assert_eq!(
            out.encodings()[0].levels,
            [Level::Number(0.0), Level::Number(6.0), Level::Number(17.0)]
        );
    }

    #[test]
    fn single_value_column() {
        let out = encode_categorical(&ds(vec![6.0; 3]), &["Protocol"]).unwrap();
        assert_eq!(out.values(), [0.0; 3]);
    }

    #[test]
    fn stored_table_reproduces_encoding() {
        let raw = ds(vec![17.0, 6.0, 0.0]);
        let once = encode_categorical(&raw, &["Protocol"]).unwrap();
        let again = once.encodings()[0].apply(&raw).unwrap();
        assert_eq!(once, again);
        let twice = encode_categorical(&once, &["Protocol"]).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn recode_after_row_loss_composes() {
        let once = encode_categorical(&ds(vec![17.0, 6.0, 0.0]), &["Protocol"]).unwrap();
        let sub = once.subset(&[0, 2]);
        let re = encode_categorical(&sub, &["Protocol"]).unwrap();
        assert_eq!(re.values(), [1.0, 0.0]);
        let table = &re.encodings()[0];
        assert_eq!(table.levels, [Level::Number(0.0), Level::Number(17.0)]);
        assert_eq!(table.code(&Cell::Number(17.0)).unwrap(), 1.0);
    }

    #[test]
    fn unknown_column_and_value() {
        assert!(matches!(
            encode_categorical(&ds(vec![1.0]), &["Service"]),
            Err(Error::UnknownColumn(_))
        ));
        let t = CategoricalTable::from_text("Service", ["http", "dns", "http"]);
        assert_eq!(t.code(&Cell::Text("http".into())).unwrap(), 1.0);
        assert!(matches!(
            t.code(&Cell::Text("ftp".into())),
            Err(Error::UnknownCategory { .. })
        ));
    }
}
