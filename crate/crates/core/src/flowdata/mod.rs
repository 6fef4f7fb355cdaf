//! Flow-record ingestion: CSV parsing, label grouping, cleaning and
//! categorical encoding of CIC-style flow exports.

mod clean;
mod dataset;
mod encode;
mod labels;
mod record;

pub use clean::{clean, preprocess, CleanConfig, CleanReport, ColumnDrop, ColumnReason, RowDrop, RowReason};
pub use dataset::Dataset;
pub use encode::{encode_categorical, CategoricalTable, Level};
pub use labels::{map_labels, normalize_label, LabelMap};
pub use record::{parse_flow_csv, Cell, FlowReader, FlowRecord, FlowTable, Identity, RowError};

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Which dataset family a file follows; selects the label rules and
/// exclusion list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Profile {
    Ids2017,
    Ids2018,
    Custom,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Ids2017 => "ids2017",
            Profile::Ids2018 => "ids2018",
            Profile::Custom => "custom",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ids2017" => Ok(Profile::Ids2017),
            "ids2018" => Ok(Profile::Ids2018),
            "custom" => Ok(Profile::Custom),
            other => Err(Error::Parameter(format!("unknown profile {other:?}"))),
        }
    }
}
