//! The `dcorr` command line: ingest, correlate, chart, report.

pub mod app;
pub mod config;
pub mod pipeline;

use disaster_corr::charts::ChartError;
use disaster_corr::corpus::CorpusError;
use disaster_corr::ingest::IngestError;
use disaster_corr::metrics::MetricsError;
use thiserror::Error;

pub use app::run;

/// Failure classes; each maps to a distinct exit status.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AppError {
    /// Bad flags, config or names.
    #[error("{0}")]
    Usage(String),
    /// Unreadable, malformed or inconsistent input data.
    #[error("{0}")]
    Data(String),
    /// Valid data that cannot support the requested analysis.
    #[error("{0}")]
    Analysis(String),
}

impl AppError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Analysis(_) => 3,
        }
    }
}

impl From<CorpusError> for AppError {
    fn from(e: CorpusError) -> Self {
        let msg = e.to_string();
        match e {
            CorpusError::EmptyIntersection(_) | CorpusError::TooFewSeries(_) => Self::Analysis(msg),
            CorpusError::UnknownSelector(_) | CorpusError::UnknownMeasure { .. } => {
                Self::Usage(msg)
            }
            _ => Self::Data(msg),
        }
    }
}

impl From<IngestError> for AppError {
    fn from(e: IngestError) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<ChartError> for AppError {
    fn from(e: ChartError) -> Self {
        let msg = e.to_string();
        match e {
            ChartError::KindMismatch { .. }
            | ChartError::SeriesCount(_)
            | ChartError::UnknownSeries(_) => Self::Usage(msg),
            ChartError::MissingIsoCodes(_) | ChartError::DuplicateIso(_) => Self::Data(msg),
            ChartError::EmptyMatrix => Self::Analysis(msg),
        }
    }
}

impl From<MetricsError> for AppError {
    fn from(e: MetricsError) -> Self {
        Self::Data(e.to_string())
    }
}
