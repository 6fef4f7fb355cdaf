//! Feature ranking by recursive elimination over random-forest Gini
//! importance, and min-max scaling.

mod forest;
mod rfe;
mod scaler;

pub use forest::{train_random_forest, DecisionTree, ForestModel, ForestParams, Node};
pub use rfe::{rfe, FeatureRanking, RfeParams};
pub use scaler::{apply_minmax, fit_minmax, scale_value, ScalerParams};
