use super::{argmax, confusion_matrix, row_tensor, History, MetricsReport, ModelConfig};
use crate::error::{Error, Result};
use crate::featsel::{apply_minmax, ScalerParams};
use crate::flowdata::{CategoricalTable, Cell, Dataset, FlowRecord, LabelMap, Profile};
use crate::nncore::Sequential;

/// Everything needed to score raw flows: network, feature projection,
/// categorical tables, scaler, class table and the label rules used in
/// training.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub network: Sequential,
    /// Selected features, in network input order.
    pub features: Vec<String>,
    pub class_names: Vec<String>,
    pub profile: Profile,
    /// Label rule text, when labels came through a [`LabelMap`].
    pub label_rules: Option<String>,
    /// Tables for the selected features that were categorical.
    pub encodings: Vec<CategoricalTable>,
    pub scaler: ScalerParams,
    pub history: History,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub class: usize,
    /// Largest class probability.
    pub confidence: f64,
    pub distribution: Vec<f64>,
}

impl TrainedModel {
    /// Rebuilds the label map from the embedded rules.
    pub fn label_map(&self) -> Result<Option<LabelMap>> {
        self.label_rules
            .as_deref()
            .map(|text| LabelMap::parse(text, self.profile))
            .transpose()
    }

    /// Class index of a raw label: through the embedded rules when present,
    /// else by exact class name. `None` for labels the rules drop.
    pub fn class_of_label(&self, raw: &str) -> Result<Option<usize>> {
        let name = match self.label_map()? {
            Some(map) => match map.classify(raw)? {
                Some(i) => map.classes()[i].clone(),
                None => return Ok(None),
            },
            None => raw.trim().to_string(),
        };
        self.class_names
            .iter()
            .position(|c| *c == name)
            .map(Some)
            .ok_or(Error::UnknownLabel(raw.to_string()))
    }

    /// Scores one row that is already projected and scaled.
    pub fn score_scaled(&self, row: &[f64]) -> Result<Prediction> {
        if row.len() != self.features.len() {
            return Err(Error::Schema(format!(
                "model expects {} features, got {}",
                self.features.len(),
                row.len()
            )));
        }
        let distribution = self.network.predict_proba(&row_tensor(row))?.into_data();
        let class = argmax(&distribution);
        Ok(Prediction {
            class,
            confidence: distribution[class],
            distribution,
        })
    }

    /// Projects a raw record onto the selected features, applies the stored
    /// categorical tables and scales it.
    pub fn features_from_record(&self, record: &FlowRecord) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(self.features.len());
        for name in &self.features {
            let cell = record
                .get(name)
                .ok_or_else(|| Error::Schema(format!("record lacks selected feature {name:?}")))?;
            let value = match self.encodings.iter().find(|t| t.column == *name) {
                Some(table) => table.code(cell)?,
                None => match cell {
                    Cell::Number(v) => *v,
                    Cell::Text(t) => {
                        return Err(Error::Row {
                            row: record.line(),
                            message: format!("non-numeric value {t:?} in feature {name:?}"),
                        })
                    }
                    Cell::Missing => {
                        return Err(Error::Row {
                            row: record.line(),
                            message: format!("missing value in feature {name:?}"),
                        })
                    }
                },
            };
            row.push(value);
        }
        self.scaler.scale_row(&mut row);
        Ok(row)
    }

    pub fn score_record(&self, record: &FlowRecord) -> Result<Prediction> {
        self.score_scaled(&self.features_from_record(record)?)
    }

    /// Projects a cleaned dataset onto the model's features, scales it and
    /// re-indexes its labels into the model's class table.
    pub fn prepare(&self, data: &Dataset) -> Result<Dataset> {
        let projected = data.select_columns(&self.features).map_err(|e| match e {
            Error::UnknownColumn(c) => Error::Schema(format!("dataset lacks selected feature {c:?}")),
            other => other,
        })?;
        let scaled = apply_minmax(&projected, &self.scaler)?;
        let remap = data
            .class_names()
            .iter()
            .map(|name| {
                self.class_names
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::UnknownLabel(name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::from_parts(
            scaled.columns().to_vec(),
            scaled.values().to_vec(),
            scaled.labels().iter().map(|&l| remap[l]).collect(),
            self.class_names.clone(),
            data.profile(),
            scaled.sources().to_vec(),
        )
    }

    fn check_columns(&self, data: &Dataset) -> Result<()> {
        if data.columns() != self.features.as_slice() {
            return Err(Error::Schema(format!(
                "dataset columns [{}] differ from model features [{}]",
                data.columns().join(", "),
                self.features.join(", ")
            )));
        }
        Ok(())
    }

    /// Predictions for every row of a prepared (projected and scaled) set.
    pub fn predict(&self, data: &Dataset) -> Result<Vec<Prediction>> {
        self.check_columns(data)?;
        data.rows().map(|row| self.score_scaled(row)).collect()
    }

    /// Confusion matrix and metrics on a prepared test set.
    pub fn evaluate(&self, test: &Dataset) -> Result<MetricsReport> {
        self.check_columns(test)?;
        if test.class_names() != self.class_names.as_slice() {
            return Err(Error::Schema("dataset class table differs from the model's".into()));
        }
        if test.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let predicted: Vec<usize> = self.predict(test)?.into_iter().map(|p| p.class).collect();
        let confusion = confusion_matrix(self.class_names.len(), test.labels(), &predicted)?;
        MetricsReport::from_confusion(self.class_names.clone(), confusion)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{fit, ConvBlock, FitOptions};
    use crate::synth::separable_blobs;

    #[test]
    fn records_score_like_rows() {
        let data = separable_blobs(100, 8, 4);
        let options = FitOptions {
            select: None,
            resample: None,
            model: ModelConfig {
                conv: vec![ConvBlock { filters: 3, kernel: 3, pool: 2 }],
                dropout: vec![],
                lstm: vec![4],
                epochs: 5,
                batch_size: 10,
                learning_rate: 0.02,
                seed: 1,
            },
            ..FitOptions::default()
        };
        let out = fit(&data, None, &options).unwrap();
        let (records, _) = data.to_records();
        let offline = out.model.predict(&out.model.prepare(&data).unwrap()).unwrap();
        for (rec, off) in records.iter().zip(&offline) {
            let on = out.model.score_record(rec).unwrap();
            assert_eq!(on, *off);
            assert!((on.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(out.model.class_of_label("DoS").unwrap(), Some(1));
        assert!(out.model.class_of_label("Nope").is_err());
    }

    #[test]
    fn missing_feature_is_schema_error() {
        let data = separable_blobs(40, 8, 5);
        let options = FitOptions {
            select: None,
            resample: None,
            model: ModelConfig {
                conv: vec![ConvBlock { filters: 2, kernel: 3, pool: 2 }],
                dropout: vec![],
                lstm: vec![2],
                epochs: 1,
                batch_size: 10,
                learning_rate: 0.02,
                seed: 1,
            },
            ..FitOptions::default()
        };
        let model = fit(&data, None, &options).unwrap().model;
        let narrow = data.select_columns(&data.columns()[1..]).unwrap();
        let (records, _) = narrow.to_records();
        match model.score_record(&records[0]) {
            Err(Error::Schema(m)) => assert!(m.contains(&data.columns()[0])),
            other => panic!("{other:?}"),
        }
        assert!(matches!(model.prepare(&narrow), Err(Error::Schema(_))));
        assert!(matches!(model.evaluate(&narrow), Err(Error::Schema(_))));
    }
}
