//! Table records, typed cells and the shape filter applied at ingest.

mod value;

pub use value::{
    calendar_span, parse_date, parse_number, render_date, render_number, render_span, CalendarSpan, Date,
    DatePrecision, ParseError,
};

use std::collections::HashSet;
use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Share of non-empty cells that must parse for a column to be typed.
pub const TYPED_CELL_RATIO: f64 = 0.85;

/// One source table as it arrives on the wire, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    pub id: String,
    pub page_title: String,
    /// Section path joined with `" | "`.
    pub table_title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SemanticType {
    String,
    Number,
    Date,
}

impl fmt::Display for SemanticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemanticType::String => "STRING",
            SemanticType::Number => "NUMBER",
            SemanticType::Date => "DATE",
        })
    }
}

/// Parsed content of a cell. `Missing` marks a cell of a typed column that
/// failed to parse (or is blank); such cells never feed an answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parsed {
    Text(String),
    Number(Decimal),
    Date(Date),
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellValue {
    pub raw: String,
    pub parsed: Parsed,
}

impl CellValue {
    pub fn is_blank(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn number(&self) -> Option<Decimal> {
        match self.parsed {
            Parsed::Number(n) => Some(n),
            _ => None,
        }
    }

    pub fn date(&self) -> Option<Date> {
        match self.parsed {
            Parsed::Date(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableMeta {
    pub id: String,
    pub page_title: String,
    pub table_title: String,
    pub category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub ty: SemanticType,
}

/// Row and column bounds a table must satisfy to be kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeBounds {
    pub min_columns: usize,
    pub min_rows: usize,
    pub max_rows: usize,
}

impl Default for ShapeBounds {
    fn default() -> Self {
        Self { min_columns: 2, min_rows: 10, max_rows: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("shape rejected: {columns} columns x {rows} rows")]
    ShapeRejected { columns: usize, rows: usize },
    #[error("malformed record: {0}")]
    MalformedRecord(String),
}

impl IngestError {
    /// Stable reason code written to the rejection log.
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::ShapeRejected { .. } => "shape",
            IngestError::MalformedRecord(m) if m.starts_with("ragged") => "ragged",
            IngestError::MalformedRecord(m) if m.starts_with("duplicate column") => "duplicate_columns",
            IngestError::MalformedRecord(_) => "malformed",
        }
    }
}

/// A typed, shape-checked table. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedTable {
    pub meta: TableMeta,
    columns: Vec<Column>,
    rows: Vec<Vec<CellValue>>,
}

impl TypedTable {
    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, col: usize) -> &Column {
        &self.columns[col]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> &CellValue {
        &self.rows[row][col]
    }

    pub fn rows(&self) -> &[Vec<CellValue>] {
        &self.rows
    }

    /// Row indices whose cell in `col` equals `value`, in table order.
    pub fn rows_where(&self, col: usize, value: &str) -> Vec<usize> {
        (0..self.rows.len()).filter(|&r| self.rows[r][col].raw == value).collect()
    }

    pub fn columns_of_type(&self, ty: SemanticType) -> Vec<usize> {
        (0..self.columns.len()).filter(|&c| self.columns[c].ty == ty).collect()
    }
}

/// Trims and collapses internal whitespace runs to one space.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Infers a column's semantic type from its cells.
///
/// DATE wins when enough cells parse as dates and at least one of them
/// carries a month, so bare year columns stay numeric.
pub fn annotate_column<S: AsRef<str>>(cells: &[S]) -> SemanticType {
    let mut non_empty = 0usize;
    let mut dates = 0usize;
    let mut numbers = 0usize;
    let mut has_month = false;
    for cell in cells {
        let cell = cell.as_ref().trim();
        if cell.is_empty() {
            continue;
        }
        non_empty += 1;
        if let Ok(d) = parse_date(cell) {
            dates += 1;
            has_month |= d.month().is_some();
        }
        if parse_number(cell).is_ok() {
            numbers += 1;
        }
    }
    if non_empty == 0 {
        return SemanticType::String;
    }
    let ratio = |n: usize| n as f64 / non_empty as f64;
    if ratio(dates) >= TYPED_CELL_RATIO && has_month {
        SemanticType::Date
    } else if ratio(numbers) >= TYPED_CELL_RATIO {
        SemanticType::Number
    } else {
        SemanticType::String
    }
}

fn typed_cell(raw: String, ty: SemanticType) -> CellValue {
    let parsed = match ty {
        SemanticType::String => Parsed::Text(raw.clone()),
        SemanticType::Number => parse_number(&raw).map(Parsed::Number).unwrap_or(Parsed::Missing),
        SemanticType::Date => parse_date(&raw).map(Parsed::Date).unwrap_or(Parsed::Missing),
    };
    CellValue { raw, parsed }
}

/// Validates, normalizes and types one raw table.
pub fn ingest(raw: RawTable, bounds: &ShapeBounds) -> Result<TypedTable, IngestError> {
    if raw.header.is_empty() {
        return Err(IngestError::MalformedRecord("empty header".into()));
    }
    let width = raw.header.len();
    if let Some(i) = raw.rows.iter().position(|r| r.len() != width) {
        return Err(IngestError::MalformedRecord(format!(
            "ragged row {i}: {} cells, header has {width}",
            raw.rows[i].len()
        )));
    }

    let names: Vec<String> = raw.header.iter().map(|h| normalize_ws(h)).collect();
    if let Some(pos) = names.iter().position(|n| n.is_empty()) {
        // blank header cells come from merged or nested headers
        return Err(IngestError::MalformedRecord(format!("blank header cell at column {pos}")));
    }
    let mut seen = HashSet::new();
    for n in &names {
        if !seen.insert(n.as_str()) {
            return Err(IngestError::MalformedRecord(format!("duplicate column {n:?}")));
        }
    }

    let rows = raw.rows.len();
    if width < bounds.min_columns || rows < bounds.min_rows || rows > bounds.max_rows {
        return Err(IngestError::ShapeRejected { columns: width, rows });
    }

    let cells: Vec<Vec<String>> =
        raw.rows.into_iter().map(|r| r.iter().map(|c| normalize_ws(c)).collect()).collect();
    let columns: Vec<Column> = names
        .into_iter()
        .enumerate()
        .map(|(c, name)| {
            let column: Vec<&str> = cells.iter().map(|r| r[c].as_str()).collect();
            Column { name, ty: annotate_column(&column) }
        })
        .collect();
    let rows = cells
        .into_iter()
        .map(|r| r.into_iter().zip(&columns).map(|(raw, col)| typed_cell(raw, col.ty)).collect())
        .collect();

    Ok(TypedTable {
        meta: TableMeta {
            id: raw.id,
            page_title: normalize_ws(&raw.page_title),
            table_title: normalize_ws(&raw.table_title),
            category: raw.category,
        },
        columns,
        rows,
    })
}
