use std::sync::Arc;

use super::{CategoricalTable, Cell, FlowRecord, Identity, Level, Profile};
use crate::error::{Error, Result};

/// A cleaned, fully numeric feature matrix with class labels.
///
/// Rows are stored row-major. `sources` remembers which input record each
/// row came from (`None` for synthetic rows added by resampling).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    data: Vec<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    profile: Profile,
    sources: Vec<Option<usize>>,
    encodings: Vec<CategoricalTable>,
}

impl Dataset {
    pub fn new(
        columns: Vec<String>,
        data: Vec<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        profile: Profile,
    ) -> Result<Self> {
        let sources = (0..labels.len()).map(Some).collect();
        Self::from_parts(columns, data, labels, class_names, profile, sources)
    }

    pub(crate) fn from_parts(
        columns: Vec<String>,
        data: Vec<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        profile: Profile,
        sources: Vec<Option<usize>>,
    ) -> Result<Self> {
        if data.len() != columns.len() * labels.len() {
            return Err(Error::Shape(format!(
                "{} values for {} rows x {} columns",
                data.len(),
                labels.len(),
                columns.len()
            )));
        }
        if sources.len() != labels.len() {
            return Err(Error::Shape("row source list length mismatch".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Input(format!(
                "label index {bad} with only {} classes",
                class_names.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite value in feature matrix".into()));
        }
        Ok(Dataset {
            columns,
            data,
            labels,
            class_names,
            profile,
            sources,
            encodings: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn sources(&self) -> &[Option<usize>] {
        &self.sources
    }

    pub fn encodings(&self) -> &[CategoricalTable] {
        &self.encodings
    }

    pub(crate) fn set_encodings(&mut self, encodings: Vec<CategoricalTable>) {
        self.encodings = encodings;
    }

    /// Row-major feature values.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.columns.len();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics; a zero-width dataset has no rows to yield anyway.
        let w = self.columns.len().max(1);
        self.data.chunks_exact(w)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Same rows and labels with a replaced value matrix.
    pub fn with_values(&self, data: Vec<f64>) -> Result<Dataset> {
        let mut out = Self::from_parts(
            self.columns.clone(),
            data,
            self.labels.clone(),
            self.class_names.clone(),
            self.profile,
            self.sources.clone(),
        )?;
        out.encodings = self.encodings.clone();
        Ok(out)
    }

    /// Rows appended or replaced wholesale, keeping columns and class table.
    pub(crate) fn with_rows(
        &self,
        data: Vec<f64>,
        labels: Vec<usize>,
        sources: Vec<Option<usize>>,
    ) -> Result<Dataset> {
        let mut out = Self::from_parts(
            self.columns.clone(),
            data,
            labels,
            self.class_names.clone(),
            self.profile,
            sources,
        )?;
        out.encodings = self.encodings.clone();
        Ok(out)
    }

    /// Projection onto the named columns, in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n.as_ref())
                    .ok_or_else(|| Error::UnknownColumn(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut data = Vec::with_capacity(idx.len() * self.n_rows());
        for row in self.rows() {
            data.extend(idx.iter().map(|&j| row[j]));
        }
        let columns: Vec<String> = idx.iter().map(|&j| self.columns[j].clone()).collect();
        let mut out = Self::from_parts(
            columns.clone(),
            data,
            self.labels.clone(),
            self.class_names.clone(),
            self.profile,
            self.sources.clone(),
        )?;
        out.encodings = self
            .encodings
            .iter()
            .filter(|t| columns.contains(&t.column))
            .cloned()
            .collect();
        Ok(out)
    }

    /// Rows at the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Dataset {
            columns: self.columns.clone(),
            data,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            profile: self.profile,
            sources: indices.iter().map(|&i| self.sources[i]).collect(),
            encodings: self.encodings.clone(),
        }
    }

    /// Writes a flow CSV (feature columns, then `Label` with class names)
    /// that [`super::preprocess`] reads back to the same dataset. Encoded
    /// columns are written as their original values. Numbers use the
    /// shortest round-trip form.
    pub fn write_csv<W: std::io::Write>(&self, sink: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(sink);
        let tables: Vec<Option<&CategoricalTable>> = self
            .columns
            .iter()
            .map(|c| self.encodings.iter().find(|t| t.column == *c))
            .collect();
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(self.columns.iter().map(String::as_str).chain(["Label"]))
            .map_err(csv_err)?;
        let mut cells = Vec::with_capacity(self.columns.len() + 1);
        for (row, &label) in self.rows().zip(&self.labels) {
            cells.clear();
            for (&v, table) in row.iter().zip(&tables) {
                let level = table.and_then(|t| t.levels.get(v as usize).filter(|_| v.fract() == 0.0 && v >= 0.0));
                cells.push(match level {
                    Some(Level::Text(t)) => t.clone(),
                    Some(Level::Number(n)) => n.to_string(),
                    None => v.to_string(),
                });
            }
            cells.push(self.class_names[label].clone());
            out.write_record(&cells).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Converts back to records and per-row class indices (into
    /// `class_names`), e.g. to run cleaning again.
    pub fn to_records(&self) -> (Vec<FlowRecord>, Vec<Option<usize>>) {
        let columns: Arc<[String]> = self.columns.clone().into();
        let records = self
            .rows()
            .zip(&self.labels)
            .map(|(row, &l)| {
                FlowRecord::new(
                    Arc::clone(&columns),
                    row.iter().map(|&v| Cell::Number(v)).collect(),
                    self.class_names[l].clone(),
                    Identity::default(),
                )
                .expect("dataset rows are well formed")
            })
            .collect();
        (records, self.labels.iter().map(|&l| Some(l)).collect())
    }
}

#[cfg(test)]
mod tests {
    use crate::flowdata::{preprocess, CleanConfig, LabelMap, Profile};

    #[test]
    fn csv_round_trip_keeps_encodings() {
        let raw = "Flow Duration,Proto,Fwd Packets,Label\n\
                   10,tcp,1.5,BENIGN\n\
                   20,udp,2.25,DoS Hulk\n\
                   30,tcp,0.1,Web Attack - XSS\n";
        let map = LabelMap::for_profile(Profile::Ids2017).unwrap();
        let config = CleanConfig {
            zero_threshold: 1.0,
            ..CleanConfig::default()
        };
        let (first, _) = preprocess(raw.as_bytes(), &map, &config).unwrap();
        let mut text = Vec::new();
        first.write_csv(&mut text).unwrap();
        let text = String::from_utf8(text).unwrap();
        assert!(text.starts_with("Flow Duration,Proto,Fwd Packets,Label\n10,tcp,1.5,Benign\n"));
        let (second, report) = preprocess(text.as_bytes(), &map, &config).unwrap();
        assert!(report.rows.is_empty() && report.columns.is_empty());
        assert_eq!(second.values(), first.values());
        assert_eq!(second.labels(), first.labels());
        assert_eq!(second.class_names(), first.class_names());
        assert_eq!(second.encodings(), first.encodings());
    }
}
