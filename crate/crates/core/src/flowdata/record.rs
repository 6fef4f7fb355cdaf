use std::io::Read;
use std::sync::Arc;

use crate::error::{Error, Result};

/// One parsed feature cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
    /// Empty, `NaN`, `Infinity` or `-Infinity` in the source.
    Missing,
}

impl Cell {
    fn parse(raw: &str) -> Cell {
        let raw = raw.trim();
        if raw.is_empty() {
            return Cell::Missing;
        }
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Number(v),
            Ok(_) => Cell::Missing,
            Err(_) => Cell::Text(raw.to_string()),
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

/// Connection identity carried beside the features; never used for scoring.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Identity {
    pub timestamp: Option<String>,
    pub flow_id: Option<String>,
    pub source: Option<String>,
    pub destination: Option<String>,
}

impl Identity {
    pub fn is_empty(&self) -> bool {
        self.timestamp.is_none()
            && self.flow_id.is_none()
            && self.source.is_none()
            && self.destination.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowRecord {
    columns: Arc<[String]>,
    values: Vec<Cell>,
    raw_label: String,
    identity: Identity,
    line: u64,
}

impl FlowRecord {
    pub fn new(
        columns: Arc<[String]>,
        values: Vec<Cell>,
        raw_label: impl Into<String>,
        identity: Identity,
    ) -> Result<Self> {
        if columns.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} feature names for {} values",
                columns.len(),
                values.len()
            )));
        }
        let raw_label = raw_label.into();
        if raw_label.trim().is_empty() {
            return Err(Error::Input("empty label".into()));
        }
        Ok(FlowRecord {
            columns,
            values,
            raw_label,
            identity,
            line: 0,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn shared_columns(&self) -> &Arc<[String]> {
        &self.columns
    }

    pub fn values(&self) -> &[Cell] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| &self.values[i])
    }

    pub fn raw_label(&self) -> &str {
        &self.raw_label
    }

    pub fn identity(&self) -> &Identity {
        &self.identity
    }

    /// Source line in the CSV (1-based, header is line 1); 0 when built in memory.
    pub fn line(&self) -> u64 {
        self.line
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(Cell::is_missing)
    }

    pub fn features(&self) -> impl Iterator<Item = (&str, &Cell)> {
        self.columns.iter().map(String::as_str).zip(&self.values)
    }
}

/// A malformed data row. Offline parsing fails on the first one; the
/// monitor counts and skips them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl From<RowError> for Error {
    fn from(e: RowError) -> Self {
        Error::Row {
            row: e.line,
            message: e.message,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum IdentityField {
    Timestamp,
    FlowId,
    SrcIp,
    DstIp,
    SrcPort,
    DstPort,
}

impl IdentityField {
    fn from_header(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "timestamp" => Some(Self::Timestamp),
            "flow id" => Some(Self::FlowId),
            "src ip" | "source ip" => Some(Self::SrcIp),
            "dst ip" | "destination ip" => Some(Self::DstIp),
            "src port" | "source port" => Some(Self::SrcPort),
            "dst port" | "destination port" => Some(Self::DstPort),
            _ => None,
        }
    }

    /// Ports are also flow statistics; addresses, ids and clock values are not.
    fn is_feature(self) -> bool {
        matches!(self, Self::SrcPort | Self::DstPort)
    }
}

enum Slot {
    Feature(usize),
    Label,
    Identity(IdentityField),
    IdentityFeature(IdentityField, usize),
}

/// Streaming reader over a CIC-style flow CSV.
pub struct FlowReader<R: Read> {
    reader: csv::Reader<R>,
    header: Vec<String>,
    columns: Arc<[String]>,
    slots: Vec<Slot>,
    record: csv::ByteRecord,
    failed: bool,
}

impl<R: Read> FlowReader<R> {
    pub fn new(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(source);
        let mut first = csv::ByteRecord::new();
        let got = reader
            .read_byte_record(&mut first)
            .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?;
        if !got || first.iter().all(|f| f.iter().all(u8::is_ascii_whitespace)) {
            return Err(Error::Schema("missing header row".into()));
        }

        let header: Vec<String> = first
            .iter()
            .map(|f| String::from_utf8_lossy(f).trim().to_string())
            .collect();
        let mut seen = std::collections::HashSet::new();
        for name in &header {
            if name.is_empty() {
                return Err(Error::Schema("empty column name in header".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name {name:?}")));
            }
        }

        let mut slots = Vec::with_capacity(header.len());
        let mut columns = Vec::new();
        let mut label_seen = false;
        for name in &header {
            if name.eq_ignore_ascii_case("label") {
                if label_seen {
                    return Err(Error::Schema("more than one Label column".into()));
                }
                label_seen = true;
                slots.push(Slot::Label);
            } else if let Some(field) = IdentityField::from_header(name) {
                if field.is_feature() {
                    slots.push(Slot::IdentityFeature(field, columns.len()));
                    columns.push(name.clone());
                } else {
                    slots.push(Slot::Identity(field));
                }
            } else {
                slots.push(Slot::Feature(columns.len()));
                columns.push(name.clone());
            }
        }
        if !label_seen {
            return Err(Error::Schema("no Label column".into()));
        }

        Ok(FlowReader {
            reader,
            header,
            columns: columns.into(),
            slots,
            record: csv::ByteRecord::new(),
            failed: false,
        })
    }

    /// Header names as they appear in the file (trimmed).
    pub fn header(&self) -> &[String] {
        &self.header
    }

    /// Feature column names, in file order.
    pub fn columns(&self) -> &Arc<[String]> {
        &self.columns
    }

    /// Next data row. `None` at end of input; `Some(Err)` for a malformed
    /// row, after which reading may continue.
    pub fn next_record(&mut self) -> Option<std::result::Result<FlowRecord, RowError>> {
        if self.failed {
            return None;
        }
        loop {
            match self.reader.read_byte_record(&mut self.record) {
                Ok(false) => return None,
                Err(e) => {
                    let line = e.position().map(|p| p.line()).unwrap_or(0);
                    // I/O failures end the stream after being reported once.
                    self.failed = matches!(e.kind(), csv::ErrorKind::Io(_));
                    return Some(Err(RowError {
                        line,
                        message: e.to_string(),
                    }));
                }
                Ok(true) => {}
            }
            // Blank lines are not rows.
            if self.record.len() == 1 && self.record[0].iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let line = self.record.position().map(|p| p.line()).unwrap_or(0);
            return Some(self.decode(line));
        }
    }

    /// Raw fields of the row most recently returned by [`next_record`](Self::next_record).
    pub fn last_raw(&self) -> Vec<String> {
        self.record
            .iter()
            .map(|f| String::from_utf8_lossy(f).into_owned())
            .collect()
    }

    fn decode(&self, line: u64) -> std::result::Result<FlowRecord, RowError> {
        if self.record.len() != self.slots.len() {
            return Err(RowError {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    self.slots.len(),
                    self.record.len()
                ),
            });
        }
        let mut values = vec![Cell::Missing; self.columns.len()];
        let mut label = String::new();
        let mut ts = None;
        let mut flow_id = None;
        let (mut src_ip, mut dst_ip, mut src_port, mut dst_port) = (None, None, None, None);

        for (slot, raw) in self.slots.iter().zip(self.record.iter()) {
            let text = String::from_utf8_lossy(raw);
            let text = text.trim();
            let non_empty = || (!text.is_empty()).then(|| text.to_string());
            match *slot {
                Slot::Feature(i) => values[i] = Cell::parse(text),
                Slot::Label => label = text.to_string(),
                Slot::Identity(field) | Slot::IdentityFeature(field, _) => {
                    if let Slot::IdentityFeature(_, i) = *slot {
                        values[i] = Cell::parse(text);
                    }
                    match field {
                        IdentityField::Timestamp => ts = non_empty(),
                        IdentityField::FlowId => flow_id = non_empty(),
                        IdentityField::SrcIp => src_ip = non_empty(),
                        IdentityField::DstIp => dst_ip = non_empty(),
                        IdentityField::SrcPort => src_port = non_empty(),
                        IdentityField::DstPort => dst_port = non_empty(),
                    }
                }
            }
        }
        if label.is_empty() {
            return Err(RowError {
                line,
                message: "empty label".into(),
            });
        }
        let identity = Identity {
            timestamp: ts,
            flow_id,
            source: endpoint(src_ip, src_port),
            destination: endpoint(dst_ip, dst_port),
        };
        Ok(FlowRecord {
            columns: Arc::clone(&self.columns),
            values,
            raw_label: label,
            identity,
            line,
        })
    }

    /// True once the underlying source failed with an I/O error.
    pub fn failed(&self) -> bool {
        self.failed
    }
}

impl<R: Read> Iterator for FlowReader<R> {
    type Item = std::result::Result<FlowRecord, RowError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_record()
    }
}

fn endpoint(ip: Option<String>, port: Option<String>) -> Option<String> {
    match (ip, port) {
        (Some(ip), Some(port)) => Some(format!("{ip}:{port}")),
        (Some(ip), None) => Some(ip),
        (None, Some(port)) => Some(port),
        (None, None) => None,
    }
}

/// All records of one CSV plus its feature header.
#[derive(Clone, Debug)]
pub struct FlowTable {
    pub columns: Arc<[String]>,
    pub records: Vec<FlowRecord>,
}

/// Parses a whole CSV, failing on the first malformed row.
pub fn parse_flow_csv<R: Read>(source: R) -> Result<FlowTable> {
    let mut reader = FlowReader::new(source)?;
    let mut records = Vec::new();
    while let Some(row) = reader.next_record() {
        records.push(row?);
    }
    Ok(FlowTable {
        columns: Arc::clone(reader.columns()),
        records,
    })
}
