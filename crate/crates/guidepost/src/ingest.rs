//! Delimited-text ingest.

use std::io::Read;

use guidepost_core::table::TableError;
use guidepost_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestOptions {
    pub delimiter: u8,
    /// First record holds column names.
    pub header: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { delimiter: b',', header: true }
    }
}

impl IngestOptions {
    pub fn tsv() -> Self {
        Self { delimiter: b'\t', header: true }
    }
}

/// Parses a delimited file into a typed dataset. Without a header, columns
/// are named `column_1`, `column_2`, ...
pub fn ingest_csv(source: impl Read, options: &IngestOptions) -> Result<Dataset, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();
    let mut names: Option<Vec<String>> = None;
    if options.header {
        match records.next() {
            Some(r) => names = Some(r.map_err(csv_error)?.iter().map(str::to_owned).collect()),
            None => return Err(TableError::NoRows.into()),
        }
    }
    let mut columns: Vec<Vec<String>> = Vec::new();
    let mut width = names.as_ref().map(Vec::len);
    for (row, record) in records.enumerate() {
        let record = record.map_err(csv_error)?;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(TableError::Ragged { row, expected, found: record.len() }.into());
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); expected];
        }
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            col.push(cell.to_owned());
        }
    }
    if columns.first().map_or(true, Vec::is_empty) {
        return Err(TableError::NoRows.into());
    }
    let names = names.unwrap_or_else(|| (1..=columns.len()).map(|i| format!("column_{i}")).collect());
    Ok(Dataset::from_text_columns(names, &columns)?)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Unreadable(e.to_string())
}
