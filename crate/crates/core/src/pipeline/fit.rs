use super::{build_cnn_lstm, split, summarize, train, MetricsReport, ModelConfig, ModelSummary, TrainedModel};
use crate::error::Result;
use crate::featsel::{apply_minmax, fit_minmax, rfe, FeatureRanking, RfeParams};
use crate::flowdata::Dataset;
use crate::resample::{resample_pipeline, ResampleConfig, ResampleReport};

/// Offline path from a cleaned dataset to an evaluated model.
#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    pub train_frac: f64,
    pub split_seed: u64,
    /// Recursive feature elimination on the training split; `None` keeps
    /// every column.
    pub select: Option<RfeParams>,
    /// SMOTE/ENN on the scaled training split.
    pub resample: Option<ResampleConfig>,
    pub model: ModelConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            train_frac: 0.8,
            split_seed: 0,
            select: Some(RfeParams::default()),
            resample: Some(ResampleConfig::default()),
            model: ModelConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub model: TrainedModel,
    pub summary: ModelSummary,
    pub ranking: Option<FeatureRanking>,
    pub resample: Option<ResampleReport>,
    /// Scaled (and resampled) rows the network was trained on.
    pub train: Dataset,
    /// Scaled held-out rows.
    pub test: Dataset,
    pub metrics: MetricsReport,
}

/// Split, select features, scale, resample, train and evaluate.
///
/// Selection, scaling and resampling only ever see the training split.
pub fn fit(data: &Dataset, label_rules: Option<String>, options: &FitOptions) -> Result<FitOutcome> {
    let (train_raw, test_raw) = split(data, options.train_frac, options.split_seed)?;
    let ranking = match &options.select {
        Some(params) if params.target_k < train_raw.n_cols() => Some(rfe(&train_raw, params)?),
        _ => None,
    };
    let features: Vec<String> = match &ranking {
        Some(r) => r.selected.clone(),
        None => train_raw.columns().to_vec(),
    };
    let train_sel = train_raw.select_columns(&features)?;
    let scaler = fit_minmax(&train_sel)?;
    let train_scaled = apply_minmax(&train_sel, &scaler)?;
    let test_scaled = apply_minmax(&test_raw.select_columns(&features)?, &scaler)?;
    let (train_set, resample) = match &options.resample {
        Some(cfg) => {
            let (d, report) = resample_pipeline(&train_scaled, cfg)?;
            (d, Some(report))
        }
        None => (train_scaled, None),
    };

    let n_classes = data.class_names().len();
    let mut network = build_cnn_lstm(&options.model, features.len(), n_classes)?;
    let summary = summarize(&network, features.len())?;
    let history = train(&mut network, &train_set, &options.model)?;
    let model = TrainedModel {
        config: options.model.clone(),
        network,
        features,
        class_names: data.class_names().to_vec(),
        profile: data.profile(),
        label_rules,
        encodings: train_sel.encodings().to_vec(),
        scaler,
        history,
    };
    let metrics = model.evaluate(&test_scaled)?;
    Ok(FitOutcome {
        model,
        summary,
        ranking,
        resample,
        train: train_set,
        test: test_scaled,
        metrics,
    })
}
