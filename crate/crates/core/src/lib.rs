//! Annual disaster/climate corpus toolkit.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ingest`] reads delimited source files, detects which corpus layout they
//!   carry and coerces cells into typed records with explicit nulls.
//! * [`corpus`] holds the normalised tables, builds year-indexed series and
//!   joins them on year; it also persists and reloads the corpus.
//! * [`stats`] implements Pearson, Spearman and Kendall estimators and labeled
//!   correlation matrices.
//! * [`metrics`] derives chart quantities (rates, shares, sunburst trees).
//! * [`charts`] turns all of the above into deterministic chart documents and
//!   SVG heatmaps.

pub mod charts;
pub mod corpus;
pub mod ingest;
pub mod metrics;
pub mod stats;

pub use corpus::{AnnualSeries, Corpus, JoinedTable};
pub use ingest::{IsoCodeTable, RawTable, SchemaKind};
pub use stats::{CorrelationMatrix, Method};
