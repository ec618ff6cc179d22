use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("table {table_id}: duplicate header {label:?} at columns {first} and {second}")]
    DuplicateHeader {
        table_id: String,
        label: String,
        first: usize,
        second: usize,
    },
    #[error("table {table_id}: header at column {column} is empty")]
    EmptyHeader { table_id: String, column: usize },
    #[error("table {table_id}: row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        table_id: String,
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("table {table_id}: no columns")]
    NoColumns { table_id: String },
    #[error("table id is empty")]
    EmptyId,
    #[error("table {table_id}: malformed delimited input: {message}")]
    Delimited { table_id: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TableSource {
    Wikitablequestions,
    Wikisql,
    Synthetic,
    #[default]
    Other,
}

/// Sidecar record that accompanies a CSV/TSV table file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMeta {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub source: TableSource,
}

/// A rectangular grid of cells with unique, non-empty headers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct Table {
    id: String,
    title: String,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
    source: TableSource,
}

#[derive(Deserialize)]
struct RawTable {
    id: String,
    #[serde(default)]
    title: String,
    headers: Vec<String>,
    #[serde(default)]
    rows: Vec<Vec<String>>,
    #[serde(default)]
    source: TableSource,
}

impl TryFrom<RawTable> for Table {
    type Error = TableError;

    fn try_from(raw: RawTable) -> Result<Self, Self::Error> {
        Table::new(raw.id, raw.title, raw.headers, raw.rows, raw.source)
    }
}

impl Table {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        headers: Vec<String>,
        rows: Vec<Vec<String>>,
        source: TableSource,
    ) -> Result<Self, TableError> {
        let id = id.into();
        if id.is_empty() {
            return Err(TableError::EmptyId);
        }
        if headers.is_empty() {
            return Err(TableError::NoColumns { table_id: id });
        }
        let mut seen: Vec<(&str, usize)> = Vec::with_capacity(headers.len());
        for (column, label) in headers.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(TableError::EmptyHeader {
                    table_id: id,
                    column,
                });
            }
            if let Some(&(_, first)) = seen.iter().find(|(l, _)| *l == label.as_str()) {
                return Err(TableError::DuplicateHeader {
                    table_id: id.clone(),
                    label: label.clone(),
                    first,
                    second: column,
                });
            }
            seen.push((label, column));
        }
        for (row, cells) in rows.iter().enumerate() {
            if cells.len() != headers.len() {
                return Err(TableError::RaggedRow {
                    table_id: id,
                    row,
                    found: cells.len(),
                    expected: headers.len(),
                });
            }
        }
        Ok(Table {
            id,
            title: title.into(),
            headers,
            rows,
            source,
        })
    }

    /// Reads a delimited file whose first record is the header row.
    pub fn from_delimited<R: Read>(
        reader: R,
        delimiter: u8,
        meta: TableMeta,
    ) -> Result<Self, TableError> {
        let mut csv = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| TableError::Delimited {
                table_id: meta.id.clone(),
                message: e.to_string(),
            })?;
            records.push(record.iter().map(str::to_owned).collect::<Vec<_>>());
        }
        let mut records = records.into_iter();
        let headers = records.next().unwrap_or_default();
        let headers = headers.into_iter().map(|h| h.trim().to_owned()).collect();
        Table::new(meta.id, meta.title, headers, records.collect(), meta.source)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> Option<&[String]> {
        self.rows.get(index).map(Vec::as_slice)
    }

    pub fn source(&self) -> TableSource {
        self.source
    }

    pub fn column_count(&self) -> usize {
        self.headers.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Column index whose header equals `label` ignoring ASCII case and
    /// surrounding whitespace.
    pub fn column_by_label(&self, label: &str) -> Option<usize> {
        let label = label.trim();
        self.headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(label))
    }
}
