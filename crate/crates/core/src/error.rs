use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: {message}")]
    Row { row: u64, message: String },

    #[error("unknown label: {0:?}")]
    UnknownLabel(String),

    #[error("unknown column: {0}")]
    UnknownColumn(String),

    #[error("column {column}: value {value:?} not present in the stored encoding table")]
    UnknownCategory { column: String, value: String },

    #[error("every row was dropped during cleaning")]
    EmptyDataset,

    #[error("every feature was dropped during cleaning")]
    EmptyFeatures,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("class {class}: {rows} rows is fewer than k+1 = {needed}")]
    InsufficientSamples {
        class: String,
        rows: usize,
        needed: usize,
    },

    #[error("class {0} has fewer than 2 rows and cannot be stratified")]
    Stratification(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("not a model file (bad magic)")]
    Format,

    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },

    #[error("model file checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum { stored: u32, computed: u32 },

    #[error("model file corrupt: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
