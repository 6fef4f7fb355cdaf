//! Class rebalancing of the training split: SMOTE oversampling of minority
//! classes followed by edited-nearest-neighbour pruning of the large ones.

mod enn;
mod knn;
mod pipeline;
mod smote;

pub use enn::{enn, enn_removals};
pub use knn::k_nearest;
pub use pipeline::{resample_pipeline, ClassCounts, ResampleConfig, ResampleReport, SmoteTarget};
pub use smote::{interpolate, smote, smote_samples, SyntheticSample};
