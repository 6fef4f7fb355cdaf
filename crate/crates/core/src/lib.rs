//! Flow-based network intrusion detection for CI/CD pipelines.
//!
//! The crate covers the whole offline and online path:
//!
//! * [`flowdata`] parses CIC-style flow CSVs, groups raw labels and cleans
//!   the feature matrix.
//! * [`featsel`] ranks features by recursive elimination over a random
//!   forest and learns min-max scaling.
//! * [`resample`] rebalances the training split with SMOTE and ENN.
//! * [`nncore`] is a small deterministic f64 neural-network kernel.
//! * [`pipeline`] assembles and trains the CNN-LSTM classifier, evaluates
//!   it and persists it.
//! * [`monitor`] scores flows online and writes CI/CD stage logs.
//! * [`cli`] backs the `nids` executable.

pub mod error;
pub mod flowdata;

pub use error::{Error, Result};
pub mod featsel;
pub mod rng;
pub mod synth;
pub mod resample;
pub mod nncore;
pub mod pipeline;
pub mod monitor;
pub mod fixtures;
pub mod cli;
