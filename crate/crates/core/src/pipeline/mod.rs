//! The CNN-LSTM classifier: architecture, stratified split, training,
//! evaluation and the model file.

mod config;
mod fit;
mod metrics;
mod model;
mod persist;
mod split;
mod train;
mod trained;

pub use config::{ConvBlock, ModelConfig, MODEL_KEYS};
pub use fit::{fit, FitOptions, FitOutcome};
pub use metrics::{binary_metrics, confusion_matrix, BinaryCounts, ClassMetrics, MetricsReport};
pub use model::{assemble_cnn_lstm, build_cnn_lstm, summarize, LayerSummary, ModelSummary};
pub use persist::{load_model, load_model_file, model_from_bytes, model_to_bytes, save_model, save_model_file, FORMAT_VERSION, MAGIC};
pub use split::{split, split_indices};
pub use train::{argmax, row_tensor, train, EpochStats, History};
pub use trained::{Prediction, TrainedModel};
