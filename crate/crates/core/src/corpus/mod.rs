//! The normalised two-corpus store: disaster factors (by region and by type)
//! and global temperature anomaly.

mod persist;
mod records;
mod series;

pub use persist::{
    load_corpus, read_manifest, save_corpus, write_atomic, Manifest, TableEntry, MANIFEST_FILE,
};
pub use records::{
    AnomalyRecord, DisasterRecord, DisasterType, TypeRecord, ADDITIVE_MEASURES,
    NONNEGATIVE_MEASURES,
};
pub use series::{annualize_anomaly, integrate_on_year, AnnualSeries, JoinPolicy, JoinedTable};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Coerced, IngestError, IsoCodeTable, NullReport, Records, SchemaKind};

/// Columns whose null fraction exceeds this are dropped at build time.
pub const DEFAULT_NULL_THRESHOLD: f64 = 0.30;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown selector `{0}`")]
    UnknownSelector(String),
    #[error("unknown measure `{measure}` for `{selector}`")]
    UnknownMeasure { selector: String, measure: String },
    #[error("corpus has no {0} table")]
    MissingTable(SchemaKind),
    #[error("corpus already has a {0} table")]
    DuplicateTable(SchemaKind),
    #[error("`{selector}` has more than one row for year {year}")]
    DuplicatePoint { selector: String, year: i32 },
    #[error("need at least 2 series to join, got {0}")]
    TooFewSeries(usize),
    #[error("duplicate series label `{0}`")]
    DuplicateLabel(String),
    #[error("series [{0}] share no year")]
    EmptyIntersection(String),
    #[error("{0}: manifest missing")]
    ManifestMissing(String),
    #[error("{file}: content digest mismatch (expected {expected}, found {found})")]
    DigestMismatch {
        file: String,
        expected: String,
        found: String,
    },
    #[error("{file}: {message}")]
    Format { file: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// A measure column dropped because too many of its cells were null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub column: String,
    pub null_fraction: f64,
}

/// Where a table came from and what was done to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub source: String,
    pub kind: SchemaKind,
    pub excluded: Vec<Exclusion>,
}

/// One normalised table of the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<R> {
    pub provenance: Provenance,
    pub measures: Vec<String>,
    pub attributes: Vec<String>,
    pub records: Vec<R>,
}

/// What [`Corpus::add`] kept and dropped from one source.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestSummary {
    pub kind: SchemaKind,
    pub source: String,
    pub rows: usize,
    pub nulls: NullReport,
    pub excluded: Vec<Exclusion>,
    pub threshold: f64,
}

impl fmt::Display for IngestSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}] {}", self.kind, self.source)?;
        write!(f, "{}", self.nulls)?;
        if self.excluded.is_empty() {
            writeln!(f, "  no columns excluded (threshold {:.2})", self.threshold)
        } else {
            for e in &self.excluded {
                writeln!(
                    f,
                    "  excluded `{}`: {:.2}% null > {:.2}%",
                    e.column,
                    e.null_fraction * 100.0,
                    self.threshold * 100.0
                )?;
            }
            Ok(())
        }
    }
}

/// Which rows a series is drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Entity(String),
    Type(DisasterType),
    Anomaly,
}

impl Selector {
    /// `anomaly`, a disaster type name (`flood`, `all-disasters`), or an
    /// entity name / alias resolved through `codes`.
    pub fn parse(text: &str, codes: &IsoCodeTable) -> Self {
        let t = text.trim();
        if t.eq_ignore_ascii_case("anomaly") || t.eq_ignore_ascii_case("temperature anomaly") {
            return Self::Anomaly;
        }
        if let Ok(d) = t.parse::<DisasterType>() {
            return Self::Type(d);
        }
        Self::Entity(crate::ingest::normalize_entity(t, codes).name)
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Entity(e) => f.write_str(e),
            Self::Type(t) => f.write_str(t.display_name()),
            Self::Anomaly => f.write_str("anomaly"),
        }
    }
}

/// An aggregate row smaller than the sum of its members.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateViolation {
    pub table: SchemaKind,
    pub year: i32,
    pub measure: String,
    pub members_sum: f64,
    pub aggregate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub regions: Option<Table<DisasterRecord>>,
    pub types: Option<Table<TypeRecord>>,
    pub anomalies: Option<Table<AnomalyRecord>>,
}

fn exclude_columns(nulls: &NullReport, measures: &[String], threshold: f64) -> Vec<Exclusion> {
    measures
        .iter()
        .filter_map(|m| {
            let frac = nulls.fraction(m)?;
            (frac > threshold).then(|| Exclusion {
                column: m.clone(),
                null_fraction: frac,
            })
        })
        .collect()
}

fn drop_measures(map: &mut BTreeMap<String, Option<f64>>, excluded: &[Exclusion]) {
    for e in excluded {
        map.remove(&e.column);
    }
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_none() && self.types.is_none() && self.anomalies.is_none()
    }

    /// Adds a coerced source, dropping measure columns whose null fraction
    /// exceeds `null_threshold`. Rejected rows make the whole source fail.
    pub fn add(
        &mut self,
        coerced: Coerced,
        null_threshold: f64,
    ) -> Result<IngestSummary, CorpusError> {
        let coerced = coerced.strict()?;
        let rows = coerced.records.len();
        let excluded = if coerced.kind == SchemaKind::Ccata {
            Vec::new()
        } else {
            exclude_columns(&coerced.nulls, &coerced.measures, null_threshold)
        };
        let measures: Vec<String> = coerced
            .measures
            .iter()
            .filter(|m| !excluded.iter().any(|e| &e.column == *m))
            .cloned()
            .collect();
        let provenance = Provenance {
            source: coerced.source_path.clone(),
            kind: coerced.kind,
            excluded: excluded.clone(),
        };
        let kind = coerced.kind;
        match coerced.records {
            Records::Region(mut records) => {
                if self.regions.is_some() {
                    return Err(CorpusError::DuplicateTable(kind));
                }
                records
                    .iter_mut()
                    .for_each(|r| drop_measures(&mut r.measures, &excluded));
                self.regions = Some(Table {
                    provenance,
                    measures,
                    attributes: coerced.attributes,
                    records,
                });
            }
            Records::Type(mut records) => {
                if self.types.is_some() {
                    return Err(CorpusError::DuplicateTable(kind));
                }
                records
                    .iter_mut()
                    .for_each(|r| drop_measures(&mut r.measures, &excluded));
                self.types = Some(Table {
                    provenance,
                    measures,
                    attributes: Vec::new(),
                    records,
                });
            }
            Records::Anomaly(records) => {
                if self.anomalies.is_some() {
                    return Err(CorpusError::DuplicateTable(kind));
                }
                self.anomalies = Some(Table {
                    provenance,
                    measures: vec!["anomaly".into()],
                    attributes: Vec::new(),
                    records,
                });
            }
        }
        Ok(IngestSummary {
            kind,
            source: coerced.source_path,
            rows,
            nulls: coerced.nulls,
            excluded,
            threshold: null_threshold,
        })
    }

    /// Annual mean anomaly series.
    pub fn anomaly_series(&self) -> Result<AnnualSeries, CorpusError> {
        let t = self
            .anomalies
            .as_ref()
            .ok_or(CorpusError::MissingTable(SchemaKind::Ccata))?;
        Ok(annualize_anomaly(&t.records))
    }

    /// One point per (selector, year) row; labeled `selector/measure`.
    pub fn build_series(
        &self,
        selector: &Selector,
        measure: &str,
    ) -> Result<AnnualSeries, CorpusError> {
        let unknown_measure = || CorpusError::UnknownMeasure {
            selector: selector.to_string(),
            measure: measure.to_string(),
        };
        let mut points = BTreeMap::new();
        let mut insert = |year: i32, v: Option<f64>| {
            if points.insert(year, v).is_some() {
                Err(CorpusError::DuplicatePoint {
                    selector: selector.to_string(),
                    year,
                })
            } else {
                Ok(())
            }
        };
        match selector {
            Selector::Anomaly => {
                if measure != "anomaly" && !measure.is_empty() {
                    return Err(unknown_measure());
                }
                return self.anomaly_series();
            }
            Selector::Type(t) => {
                let table = self
                    .types
                    .as_ref()
                    .ok_or(CorpusError::MissingTable(SchemaKind::EadrfType))?;
                if !table.measures.iter().any(|m| m == measure) {
                    return Err(unknown_measure());
                }
                let mut any = false;
                for r in table.records.iter().filter(|r| r.disaster_type == *t) {
                    any = true;
                    insert(r.year, r.measures.get(measure).copied().flatten())?;
                }
                if !any {
                    return Err(CorpusError::UnknownSelector(selector.to_string()));
                }
            }
            Selector::Entity(name) => {
                let table = self
                    .regions
                    .as_ref()
                    .ok_or(CorpusError::MissingTable(SchemaKind::EadrfRegion))?;
                if !table.measures.iter().any(|m| m == measure) {
                    return Err(unknown_measure());
                }
                let mut any = false;
                for r in table.records.iter().filter(|r| {
                    r.entity.eq_ignore_ascii_case(name)
                        || r.iso
                            .as_deref()
                            .is_some_and(|c| c.eq_ignore_ascii_case(name))
                }) {
                    any = true;
                    insert(r.year, r.measures.get(measure).copied().flatten())?;
                }
                if !any {
                    return Err(CorpusError::UnknownSelector(selector.to_string()));
                }
            }
        }
        Ok(AnnualSeries::new(format!("{selector}/{measure}"), points))
    }

    /// Years in which the members of an aggregate row add up to more than the
    /// aggregate itself. Reported, never repaired.
    pub fn aggregate_violations(&self) -> Vec<AggregateViolation> {
        let mut out = Vec::new();
        if let Some(t) = &self.regions {
            let rows = t
                .records
                .iter()
                .map(|r| (r.entity == "World", !r.aggregate, r.year, &r.measures));
            check_aggregates(SchemaKind::EadrfRegion, rows, &t.measures, &mut out);
        }
        if let Some(t) = &self.types {
            let rows = t.records.iter().map(|r| {
                let agg = r.disaster_type.is_aggregate();
                (agg, !agg, r.year, &r.measures)
            });
            check_aggregates(SchemaKind::EadrfType, rows, &t.measures, &mut out);
        }
        out
    }
}

fn check_aggregates<'a>(
    table: SchemaKind,
    rows: impl Iterator<Item = (bool, bool, i32, &'a BTreeMap<String, Option<f64>>)>,
    measures: &[String],
    out: &mut Vec<AggregateViolation>,
) {
    // (year, measure) -> (members sum, aggregate value)
    let mut acc: BTreeMap<(i32, &str), (f64, Option<f64>)> = BTreeMap::new();
    let additive: Vec<&str> = measures
        .iter()
        .map(String::as_str)
        .filter(|m| ADDITIVE_MEASURES.contains(m))
        .collect();
    for (is_total, is_member, year, values) in rows {
        for m in &additive {
            let Some(v) = values.get(*m).copied().flatten() else {
                continue;
            };
            let e = acc.entry((year, m)).or_insert((0.0, None));
            if is_total {
                e.1 = Some(v);
            } else if is_member {
                e.0 += v;
            }
        }
    }
    for ((year, measure), (sum, agg)) in acc {
        if let Some(agg) = agg {
            if sum > agg * (1.0 + 1e-9) + 1e-9 {
                out.push(AggregateViolation {
                    table,
                    year,
                    measure: measure.to_string(),
                    members_sum: sum,
                    aggregate: agg,
                });
            }
        }
    }
}
