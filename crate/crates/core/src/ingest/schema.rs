use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::coerce::{is_null, parse_number};
use super::{IngestError, RawTable};

/// The three source layouts the corpus understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemaKind {
    /// Disaster factors by country/region: ENTITY, CODE, YEAR + measures.
    EadrfRegion,
    /// Disaster factors by disaster type: ENTITY, YEAR + measures.
    EadrfType,
    /// Global temperature anomaly: a date or year column + one anomaly column.
    Ccata,
}

impl SchemaKind {
    pub const ALL: [SchemaKind; 3] = [Self::EadrfRegion, Self::EadrfType, Self::Ccata];

    pub fn name(self) -> &'static str {
        match self {
            Self::EadrfRegion => "eadrf-region",
            Self::EadrfType => "eadrf-type",
            Self::Ccata => "ccata",
        }
    }

    /// Roles this kind needs; used to break ties between candidates whose
    /// requirements nest (a region table is also a valid type table).
    fn required_roles(self) -> &'static [&'static str] {
        match self {
            Self::EadrfRegion => &["ENTITY", "CODE", "YEAR", "MEASURE"],
            Self::EadrfType => &["ENTITY", "YEAR", "MEASURE"],
            Self::Ccata => &["DATE", "ANOMALY"],
        }
    }

    fn matches(self, cols: &[String]) -> bool {
        let has = |role: &str| cols.iter().any(|c| role_of(c) == Some(role));
        match self {
            Self::EadrfRegion => {
                has("ENTITY")
                    && has("CODE")
                    && has("YEAR")
                    && residual_count(cols, &["ENTITY", "CODE", "YEAR"]) > 0
            }
            Self::EadrfType => {
                has("ENTITY") && has("YEAR") && residual_count(cols, &["ENTITY", "YEAR"]) > 0
            }
            Self::Ccata => {
                cols.iter().any(|c| is_date_column(c)) && anomaly_columns(cols).len() == 1
            }
        }
    }
}

impl fmt::Display for SchemaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown schema kind `{s}`"))
    }
}

/// Upper-cased header with spaces/hyphens folded to `_` and trailing dots
/// (truncated exports) removed.
fn normalize_header(h: &str) -> String {
    h.trim()
        .trim_end_matches('.')
        .to_uppercase()
        .replace([' ', '-'], "_")
}

fn role_of(header: &str) -> Option<&'static str> {
    match normalize_header(header).as_str() {
        "ENTITY" => Some("ENTITY"),
        "CODE" | "ISO" | "ISO_CODE" => Some("CODE"),
        "YEAR" => Some("YEAR"),
        _ => None,
    }
}

fn is_date_column(header: &str) -> bool {
    matches!(normalize_header(header).as_str(), "YEAR" | "DATE" | "DT")
}

fn is_anomaly_column(header: &str) -> bool {
    let h = normalize_header(header);
    h.contains("ANOMALY") && !h.contains("UNCERTAINTY")
}

fn anomaly_columns(cols: &[String]) -> Vec<usize> {
    cols.iter()
        .enumerate()
        .filter(|(_, c)| is_anomaly_column(c))
        .map(|(i, _)| i)
        .collect()
}

fn residual_count(cols: &[String], roles: &[&str]) -> usize {
    cols.iter()
        .filter(|c| role_of(c).is_none_or(|r| !roles.contains(&r)))
        .count()
}

/// Maps a source measure header to its canonical measure name.
pub fn canonical_measure(header: &str) -> String {
    let h = normalize_header(header);
    let name = match h.as_str() {
        "DEATHS" | "TOTAL_DEATHS" => "deaths",
        "DEATH_RATE" | "DEATH_RATE_PER_100K" => "death_rate",
        "PERCENTAGE_SHARE_DEATHS" | "SHARE_DEATHS" | "PERCENTAGE_SHARE_OF_DEATHS" => {
            "percentage_share_deaths"
        }
        "INTERNALLY_DISPLACED_POPULATION" | "INTERNALLY_DISPLACED" | "IDP" => {
            "internally_displaced"
        }
        "AFFECTED" | "TOTAL_AFFECTED" => "affected",
        "HOMELESS" => "homeless",
        "INJURED" => "injured",
        "ECONOMIC_DAMAGE" | "ECONOMIC_DAMAGES" | "ECONOMIC_DAMAGE_USD" | "TOTAL_DAMAGES" => {
            "economic_damage"
        }
        "GDP_LOSS_SHARE" | "ECONOMIC_DAMAGE_GDP" | "DAMAGE_SHARE_GDP" => "gdp_loss_share",
        "NEWS_COVERAGE_SHARE" | "NEWS_COVERAGE" => "news_coverage_share",
        "COUNT" | "EVENTS" | "NUMBER_OF_EVENTS" | "OCCURRENCES" | "REPORTED_DISASTERS" => "count",
        "POPULATION" => "population",
        _ => return h.to_lowercase(),
    };
    name.to_string()
}

/// Returns the unique schema whose required columns are all present.
///
/// When one candidate's requirements strictly contain another's, the more
/// specific candidate wins.
pub fn detect_schema(table: &RawTable) -> Result<SchemaKind, IngestError> {
    let cols = table.header();
    let candidates: Vec<SchemaKind> = SchemaKind::ALL
        .into_iter()
        .filter(|k| k.matches(cols))
        .collect();
    let specific: Vec<SchemaKind> = candidates
        .iter()
        .copied()
        .filter(|k| {
            let mine: BTreeSet<_> = k.required_roles().iter().collect();
            !candidates.iter().any(|other| {
                let theirs: BTreeSet<_> = other.required_roles().iter().collect();
                other != k && mine.is_subset(&theirs) && mine != theirs
            })
        })
        .collect();
    match specific.as_slice() {
        [one] => Ok(*one),
        [] => Err(IngestError::UnknownSchema {
            path: table.source_path().to_string(),
            columns: cols.join(", "),
        }),
        many => Err(IngestError::AmbiguousSchema {
            path: table.source_path().to_string(),
            candidates: many.iter().map(|k| k.name()).collect::<Vec<_>>().join(", "),
        }),
    }
}

/// Column roles of a table for a given schema kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnLayout {
    pub entity: Option<usize>,
    pub code: Option<usize>,
    pub date: usize,
    pub anomaly: Option<usize>,
    /// `(column index, canonical measure name)` in source order.
    pub measures: Vec<(usize, String)>,
    /// Non-numeric residual columns kept as text attributes.
    pub attributes: Vec<(usize, String)>,
}

impl ColumnLayout {
    /// Assigns roles. Residual columns with at least one numeric cell are
    /// measures; residual columns with no numeric cell are text attributes.
    pub fn resolve(table: &RawTable, kind: SchemaKind) -> Result<Self, IngestError> {
        let cols = table.header();
        let find = |role: &str| cols.iter().position(|c| role_of(c) == Some(role));
        let path = || table.source_path().to_string();
        let (entity, code, date, anomaly) = match kind {
            SchemaKind::EadrfRegion => (find("ENTITY"), find("CODE"), find("YEAR"), None),
            SchemaKind::EadrfType => (find("ENTITY"), None, find("YEAR"), None),
            SchemaKind::Ccata => (
                None,
                None,
                cols.iter().position(|c| is_date_column(c)),
                anomaly_columns(cols).first().copied(),
            ),
        };
        let date = date.ok_or_else(|| IngestError::UnknownSchema {
            path: path(),
            columns: cols.join(", "),
        })?;

        let mut measures = Vec::new();
        let mut attributes = Vec::new();
        if kind != SchemaKind::Ccata {
            for (i, header) in cols.iter().enumerate() {
                if Some(i) == entity || Some(i) == code || i == date {
                    continue;
                }
                let numeric = table
                    .rows()
                    .iter()
                    .any(|r| !is_null(&r[i]) && parse_number(&r[i]).is_some());
                let all_null = table.rows().iter().all(|r| is_null(&r[i]));
                if numeric || all_null {
                    let name = canonical_measure(header);
                    if measures.iter().any(|(_, m)| *m == name) {
                        return Err(IngestError::DuplicateHeader { path: path(), name });
                    }
                    measures.push((i, name));
                } else {
                    attributes.push((i, header.to_lowercase()));
                }
            }
        }
        Ok(Self {
            entity,
            code,
            date,
            anomaly,
            measures,
            attributes,
        })
    }
}
