//! Delimited-file ingestion.

mod coerce;
mod delimited;
mod iso;
mod schema;

pub use coerce::{coerce_records, parse_year, Coerced, ColumnNulls, NullReport, Records};
pub use delimited::{parse_delimited, read_table, Dialect, RawTable};
pub use iso::{normalize_entity, EntityMatch, IsoCodeTable};
pub use schema::{canonical_measure, detect_schema, ColumnLayout, SchemaKind};

use thiserror::Error;

/// Errors raised while reading, classifying or coercing a source table.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("{path}: input is empty")]
    EmptyInput { path: String },

    #[error("{path}:{line}: expected {expected} cells, found {found}")]
    RaggedRow {
        path: String,
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("{path}: duplicate header column `{name}`")]
    DuplicateHeader { path: String, name: String },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: columns match more than one schema ({candidates})")]
    AmbiguousSchema { path: String, candidates: String },

    #[error("{path}: columns [{columns}] match no known schema")]
    UnknownSchema { path: String, columns: String },

    #[error("{path}:{line}: column `{column}`: cannot parse `{value}` as a number")]
    UnparseableNumber {
        path: String,
        line: u64,
        column: String,
        value: String,
    },

    #[error("{path}:{line}: year {year} outside [1850, 2100]")]
    YearOutOfRange { path: String, line: u64, year: i64 },

    #[error("{path}:{line}: cannot parse `{value}` as a year or date")]
    InvalidDate {
        path: String,
        line: u64,
        value: String,
    },

    #[error("{path}:{line}: column `{column}` is negative ({value})")]
    NegativeMeasure {
        path: String,
        line: u64,
        column: String,
        value: f64,
    },

    #[error("{path}:{line}: `{value}` is not a known disaster type")]
    UnknownDisasterType {
        path: String,
        line: u64,
        value: String,
    },

    #[error("{path}:{line}: anomaly {value} outside sanity bound |a| < 10")]
    AnomalyOutOfBounds { path: String, line: u64, value: f64 },

    #[error("{path}:{line}: entity cell is empty")]
    MissingEntity { path: String, line: u64 },

    #[error("iso table line {line}: {message}")]
    InvalidIsoTable { line: usize, message: String },
}
