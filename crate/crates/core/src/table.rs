//! Typed columnar storage for an `n x d` data matrix.
//!
//! Columns are either numeric (64-bit reals plus a presence mask) or
//! categorical (dictionary codes). Missing cells stay in place so every
//! column has exactly `n` cells.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Fraction of non-missing cells that must parse as reals for a column to
/// be typed numeric.
pub const NUMERIC_PARSE_THRESHOLD: f64 = 0.95;

/// Code stored for a missing categorical cell.
pub const MISSING_CODE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("zero data rows")]
    NoRows,
    #[error("empty column")]
    EmptyColumn,
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("inconsistent column counts: row {row} has {found} cells, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("invalid column index {0}")]
    InvalidColumn(usize),
    #[error("malformed predicate: {0}")]
    MalformedPredicate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// Content fingerprint of a dataset, rendered as 32 lowercase hex digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DatasetId(String);

impl DatasetId {
    pub fn new(hex: impl Into<String>) -> Self {
        Self(hex.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub index: usize,
    pub name: String,
    pub kind: ColumnKind,
    pub missing_count: usize,
    /// Number of distinct non-missing values; categorical columns only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distinct_count: Option<usize>,
    /// Numeric column whose present values are all integers.
    #[serde(default)]
    pub integer_valued: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericColumn {
    values: Vec<f64>,
    present: Vec<bool>,
}

impl NumericColumn {
    /// Builds a column from optional cells. Non-finite values count as missing.
    pub fn from_options(cells: impl IntoIterator<Item = Option<f64>>) -> Self {
        let mut values = Vec::new();
        let mut present = Vec::new();
        for cell in cells {
            match cell {
                Some(v) if v.is_finite() => {
                    values.push(v);
                    present.push(true);
                }
                _ => {
                    values.push(0.0);
                    present.push(false);
                }
            }
        }
        Self { values, present }
    }

    pub fn from_values(values: &[f64]) -> Self {
        Self::from_options(values.iter().map(|&v| Some(v)))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw storage; missing slots hold `0.0` and must be read through the mask.
    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.present
    }

    pub fn get(&self, row: usize) -> Option<f64> {
        if self.present[row] {
            Some(self.values[row])
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.values
            .iter()
            .zip(&self.present)
            .map(|(&v, &p)| if p { Some(v) } else { None })
    }

    /// Present values in row order.
    pub fn present_values(&self) -> Vec<f64> {
        self.iter().flatten().collect()
    }

    pub fn present_with_rows(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.iter()
            .enumerate()
            .filter_map(|(row, v)| v.map(|v| (row, v)))
    }

    pub fn missing_count(&self) -> usize {
        self.present.iter().filter(|p| !**p).count()
    }

    pub fn is_integer_valued(&self) -> bool {
        let mut any = false;
        for v in self.iter().flatten() {
            any = true;
            if v != crate::math::floor(v) || v.abs() > 9.007_199_254_740_992e15 {
                return false;
            }
        }
        any
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalColumn {
    codes: Vec<u32>,
    dictionary: Vec<String>,
}

impl CategoricalColumn {
    /// Dictionary-encodes cells in first-appearance order.
    pub fn from_options<S: AsRef<str>>(cells: impl IntoIterator<Item = Option<S>>) -> Self {
        let mut lookup: alloc::collections::BTreeMap<String, u32> = Default::default();
        let mut dictionary = Vec::new();
        let mut codes = Vec::new();
        for cell in cells {
            match cell {
                Some(s) => {
                    let s = s.as_ref();
                    let code = match lookup.get(s) {
                        Some(&c) => c,
                        None => {
                            let c = dictionary.len() as u32;
                            dictionary.push(s.to_string());
                            lookup.insert(s.to_string(), c);
                            c
                        }
                    };
                    codes.push(code);
                }
                None => codes.push(MISSING_CODE),
            }
        }
        Self { codes, dictionary }
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        Self::from_options(labels.iter().map(|s| Some(s.as_ref())))
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn dictionary(&self) -> &[String] {
        &self.dictionary
    }

    pub fn get(&self, row: usize) -> Option<&str> {
        match self.codes[row] {
            MISSING_CODE => None,
            c => Some(&self.dictionary[c as usize]),
        }
    }

    pub fn label(&self, code: u32) -> &str {
        &self.dictionary[code as usize]
    }

    pub fn code_of(&self, label: &str) -> Option<u32> {
        self.dictionary
            .iter()
            .position(|d| d == label)
            .map(|p| p as u32)
    }

    /// Occurrence count per dictionary code.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.dictionary.len()];
        for &c in &self.codes {
            if c != MISSING_CODE {
                counts[c as usize] += 1;
            }
        }
        counts
    }

    pub fn missing_count(&self) -> usize {
        self.codes.iter().filter(|&&c| c == MISSING_CODE).count()
    }

    /// Distinct non-missing values.
    pub fn distinct_count(&self) -> usize {
        self.counts().iter().filter(|&&c| c > 0).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(NumericColumn),
    Categorical(CategoricalColumn),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(c) => c.len(),
            ColumnData::Categorical(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub meta: ColumnMeta,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(&self) -> Option<&NumericColumn> {
        match &self.data {
            ColumnData::Numeric(c) => Some(c),
            ColumnData::Categorical(_) => None,
        }
    }

    pub fn categorical(&self) -> Option<&CategoricalColumn> {
        match &self.data {
            ColumnData::Categorical(c) => Some(c),
            ColumnData::Numeric(_) => None,
        }
    }
}

/// Immutable typed table. Build once, then share freely.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    id: DatasetId,
    n: usize,
    columns: Vec<Column>,
}

/// Missing-value tokens: empty, `NA`, `NaN` (case-insensitive, surrounding
/// whitespace ignored).
pub fn is_missing_token(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan")
}

/// Parses a cell as a finite real.
pub fn parse_real(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Types a column from its raw cells: numeric iff at least 95% of the
/// non-missing cells parse as finite reals.
pub fn infer_column_kind<S: AsRef<str>>(cells: &[S]) -> Result<ColumnKind, TableError> {
    let mut non_missing = 0usize;
    let mut parsed = 0usize;
    for cell in cells {
        let cell = cell.as_ref();
        if is_missing_token(cell) {
            continue;
        }
        non_missing += 1;
        if parse_real(cell).is_some() {
            parsed += 1;
        }
    }
    if non_missing == 0 {
        return Err(TableError::EmptyColumn);
    }
    if parsed as f64 >= NUMERIC_PARSE_THRESHOLD * non_missing as f64 {
        Ok(ColumnKind::Numeric)
    } else {
        Ok(ColumnKind::Categorical)
    }
}

/// Converts raw text cells into typed column storage. A column whose cells
/// are all missing is kept as an all-missing numeric column.
pub fn column_from_text<S: AsRef<str>>(cells: &[S]) -> ColumnData {
    match infer_column_kind(cells) {
        Ok(ColumnKind::Categorical) => ColumnData::Categorical(CategoricalColumn::from_options(
            cells.iter().map(|c| {
                let c = c.as_ref();
                if is_missing_token(c) {
                    None
                } else {
                    Some(c)
                }
            }),
        )),
        Ok(ColumnKind::Numeric) | Err(_) => ColumnData::Numeric(NumericColumn::from_options(
            cells.iter().map(|c| parse_real(c.as_ref())),
        )),
    }
}

impl Dataset {
    /// Assembles a dataset from named columns, validating shape and names.
    pub fn from_columns(columns: Vec<(String, ColumnData)>) -> Result<Self, TableError> {
        let n = columns.first().map(|(_, c)| c.len()).unwrap_or(0);
        if n == 0 {
            return Err(TableError::NoRows);
        }
        let mut names = BTreeSet::new();
        let mut out = Vec::with_capacity(columns.len());
        for (index, (name, data)) in columns.into_iter().enumerate() {
            if data.len() != n {
                return Err(TableError::Ragged {
                    row: n.min(data.len()),
                    expected: n,
                    found: data.len(),
                });
            }
            if !names.insert(name.clone()) {
                return Err(TableError::DuplicateColumn(name));
            }
            let meta = match &data {
                ColumnData::Numeric(c) => ColumnMeta {
                    index,
                    name,
                    kind: ColumnKind::Numeric,
                    missing_count: c.missing_count(),
                    distinct_count: None,
                    integer_valued: c.is_integer_valued(),
                },
                ColumnData::Categorical(c) => ColumnMeta {
                    index,
                    name,
                    kind: ColumnKind::Categorical,
                    missing_count: c.missing_count(),
                    distinct_count: Some(c.distinct_count()),
                    integer_valued: false,
                },
            };
            out.push(Column { meta, data });
        }
        let id = fingerprint(n, &out);
        Ok(Self { id, n, columns: out })
    }

    /// Types and assembles a dataset from a header and column-major text cells.
    pub fn from_text_columns<S: AsRef<str>>(
        names: Vec<String>,
        cells: &[Vec<S>],
    ) -> Result<Self, TableError> {
        let columns = names
            .into_iter()
            .zip(cells)
            .map(|(name, cells)| (name, column_from_text(cells)))
            .collect();
        Self::from_columns(columns)
    }

    pub fn id(&self) -> &DatasetId {
        &self.id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> Option<&Column> {
        self.columns.get(index)
    }

    pub fn column_by_name(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.meta.name == name)
    }

    pub fn metas(&self) -> Vec<ColumnMeta> {
        self.columns.iter().map(|c| c.meta.clone()).collect()
    }

    pub fn numeric(&self, index: usize) -> Option<&NumericColumn> {
        self.columns.get(index).and_then(Column::numeric)
    }

    /// Rows matching an optional predicate, in original order, paged.
    pub fn get_rows(&self, query: &RowQuery) -> Result<RowPage, TableError> {
        let projection: Vec<usize> = if query.projection.is_empty() {
            (0..self.d()).collect()
        } else {
            query.projection.clone()
        };
        for &c in &projection {
            if c >= self.d() {
                return Err(TableError::InvalidColumn(c));
            }
        }
        let matcher = match &query.filter {
            Some(p) => Some(self.compile(p)?),
            None => None,
        };
        let mut total = 0usize;
        let mut rows = Vec::new();
        for row in 0..self.n {
            if let Some(m) = &matcher {
                if !m.matches(self, row) {
                    continue;
                }
            }
            if total >= query.offset && rows.len() < query.limit {
                let cells = projection.iter().map(|&c| self.cell(c, row)).collect();
                rows.push(Row { index: row, cells });
            }
            total += 1;
        }
        Ok(RowPage {
            columns: projection
                .iter()
                .map(|&c| self.columns[c].meta.name.clone())
                .collect(),
            total,
            offset: query.offset,
            limit: query.limit,
            rows,
        })
    }

    pub fn cell(&self, column: usize, row: usize) -> Cell {
        match &self.columns[column].data {
            ColumnData::Numeric(c) => c.get(row).map(Cell::Number).unwrap_or(Cell::Null),
            ColumnData::Categorical(c) => c
                .get(row)
                .map(|s| Cell::Text(s.to_string()))
                .unwrap_or(Cell::Null),
        }
    }

    fn compile(&self, predicate: &RowPredicate) -> Result<Matcher, TableError> {
        let column = predicate.column();
        let col = self
            .columns
            .get(column)
            .ok_or(TableError::InvalidColumn(column))?;
        match (predicate, &col.data) {
            (RowPredicate::Equals { value, .. }, ColumnData::Categorical(c)) => {
                Ok(Matcher::Code(column, c.code_of(value)))
            }
            (RowPredicate::Equals { value, .. }, ColumnData::Numeric(_)) => {
                let v = parse_real(value).ok_or_else(|| {
                    TableError::MalformedPredicate(format!("{value:?} is not a number"))
                })?;
                Ok(Matcher::Range(column, v, v, false))
            }
            (_, ColumnData::Categorical(_)) => Err(TableError::MalformedPredicate(
                "range comparison on a categorical column".into(),
            )),
            (RowPredicate::Compare { op, value, .. }, ColumnData::Numeric(_)) => {
                let v = *value;
                if !v.is_finite() {
                    return Err(TableError::MalformedPredicate("non-finite bound".into()));
                }
                Ok(match op {
                    CompareOp::Gt => Matcher::Open(column, Some(v), None),
                    CompareOp::Lt => Matcher::Open(column, None, Some(v)),
                    CompareOp::Ge => Matcher::Range(column, v, f64::INFINITY, false),
                    CompareOp::Le => Matcher::Range(column, f64::NEG_INFINITY, v, false),
                })
            }
            (RowPredicate::Between { lo, hi, .. }, ColumnData::Numeric(_))
            | (RowPredicate::Outside { lo, hi, .. }, ColumnData::Numeric(_)) => {
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(TableError::MalformedPredicate("invalid range".into()));
                }
                let outside = matches!(predicate, RowPredicate::Outside { .. });
                Ok(Matcher::Range(column, *lo, *hi, outside))
            }
        }
    }
}

enum Matcher {
    Code(usize, Option<u32>),
    /// Inclusive range; the flag inverts to "strictly outside".
    Range(usize, f64, f64, bool),
    /// Strict bounds.
    Open(usize, Option<f64>, Option<f64>),
}

impl Matcher {
    fn matches(&self, ds: &Dataset, row: usize) -> bool {
        match *self {
            Matcher::Code(c, code) => match (&ds.columns[c].data, code) {
                (ColumnData::Categorical(col), Some(code)) => col.codes[row] == code,
                _ => false,
            },
            Matcher::Range(c, lo, hi, outside) => match ds.columns[c].numeric().and_then(|n| n.get(row)) {
                Some(v) if outside => v < lo || v > hi,
                Some(v) => v >= lo && v <= hi,
                None => false,
            },
            Matcher::Open(c, lo, hi) => match ds.columns[c].numeric().and_then(|n| n.get(row)) {
                Some(v) => lo.map_or(true, |lo| v > lo) && hi.map_or(true, |hi| v < hi),
                None => false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareOp {
    Gt,
    Ge,
    Lt,
    Le,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "predicate", rename_all = "snake_case")]
pub enum RowPredicate {
    /// Category label (or number) equality.
    Equals { column: usize, value: String },
    Compare { column: usize, op: CompareOp, value: f64 },
    /// Inclusive numeric range.
    Between { column: usize, lo: f64, hi: f64 },
    /// Strictly outside `[lo, hi]`; selects the rows behind Tukey outliers.
    Outside { column: usize, lo: f64, hi: f64 },
}

impl RowPredicate {
    pub fn column(&self) -> usize {
        match self {
            RowPredicate::Equals { column, .. }
            | RowPredicate::Compare { column, .. }
            | RowPredicate::Between { column, .. }
            | RowPredicate::Outside { column, .. } => *column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RowQuery {
    pub filter: Option<RowPredicate>,
    /// Column indices to return; empty means all columns.
    pub projection: Vec<usize>,
    pub limit: usize,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub index: usize,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowPage {
    pub columns: Vec<String>,
    /// Rows matching the predicate, before paging.
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub rows: Vec<Row>,
}

fn fingerprint(n: usize, columns: &[Column]) -> DatasetId {
    let mut h = Sha256::new();
    h.update(b"guidepost-dataset-v1");
    h.update((n as u64).to_le_bytes());
    h.update((columns.len() as u64).to_le_bytes());
    for col in columns {
        h.update((col.meta.name.len() as u64).to_le_bytes());
        h.update(col.meta.name.as_bytes());
        match &col.data {
            ColumnData::Numeric(c) => {
                h.update([0u8]);
                for v in c.iter() {
                    match v {
                        Some(v) => {
                            h.update([1u8]);
                            h.update(v.to_bits().to_le_bytes());
                        }
                        None => h.update([0u8]),
                    }
                }
            }
            ColumnData::Categorical(c) => {
                h.update([1u8]);
                h.update((c.dictionary.len() as u64).to_le_bytes());
                for s in &c.dictionary {
                    h.update((s.len() as u64).to_le_bytes());
                    h.update(s.as_bytes());
                }
                for &code in &c.codes {
                    h.update(code.to_le_bytes());
                }
            }
        }
    }
    DatasetId(hex(&h.finalize()[..16]))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    const DIGITS: &[u8; 16] = b"0123456789abcdef";
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push(DIGITS[(b >> 4) as usize] as char);
        s.push(DIGITS[(b & 0xf) as usize] as char);
    }
    s
}
