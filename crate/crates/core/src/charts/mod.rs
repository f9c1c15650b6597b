//! Renderer-agnostic chart documents and SVG correlation heatmaps.
//!
//! Documents serialize to JSON with keys in lexicographic order and numbers
//! in shortest round-trip form, so identical inputs give identical bytes.

mod heatmap;

pub use heatmap::{ramp_color, ramp_position, render_heatmap_svg, HeatmapStyle, Rgb};

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::JoinedTable;
use crate::metrics::{ShareTable, Sunburst, SunburstNode};
use crate::stats::{CellFailure, CorrelationMatrix, Method};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("{kind} chart cannot be built from {input}")]
    KindMismatch {
        kind: ChartKind,
        input: &'static str,
    },
    #[error("dual-axis chart needs exactly 2 series, got {0}")]
    SeriesCount(usize),
    #[error("unknown secondary-axis series `{0}`")]
    UnknownSeries(String),
    #[error("entities without an ISO code: {}", .0.join(", "))]
    MissingIsoCodes(Vec<String>),
    #[error("ISO code `{0}` appears more than once")]
    DuplicateIso(String),
    #[error("matrix is empty")]
    EmptyMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    TimeSeries,
    DualAxis,
    StackedArea,
    Sunburst,
    Choropleth,
    Heatmap,
}

impl ChartKind {
    pub const ALL: [ChartKind; 6] = [
        Self::TimeSeries,
        Self::DualAxis,
        Self::StackedArea,
        Self::Sunburst,
        Self::Choropleth,
        Self::Heatmap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::TimeSeries => "time-series",
            Self::DualAxis => "dual-axis",
            Self::StackedArea => "stacked-area",
            Self::Sunburst => "sunburst",
            Self::Choropleth => "choropleth",
            Self::Heatmap => "heatmap",
        }
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ChartKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded: String = s
            .trim()
            .to_lowercase()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect();
        Self::ALL
            .into_iter()
            .find(|k| k.name().replace('-', "") == folded)
            .ok_or_else(|| format!("unknown chart kind `{s}`"))
    }
}

/// One row of choropleth input.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionValue {
    pub entity: String,
    pub iso: Option<String>,
    pub value: Option<f64>,
}

/// What a chart is built from.
#[derive(Debug, Clone, Copy)]
pub enum ChartInput<'a> {
    Table(&'a JoinedTable),
    Shares(&'a ShareTable),
    Tree(&'a Sunburst),
    Regions(&'a [RegionValue]),
    Matrix(&'a CorrelationMatrix),
}

impl ChartInput<'_> {
    fn name(&self) -> &'static str {
        match self {
            Self::Table(_) => "a year table",
            Self::Shares(_) => "a share table",
            Self::Tree(_) => "a hierarchy",
            Self::Regions(_) => "region values",
            Self::Matrix(_) => "a correlation matrix",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Axis {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl Axis {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            unit: None,
        }
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = Some(unit.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChartOptions {
    pub title: String,
    pub x: Option<Axis>,
    pub y: Option<Axis>,
    /// Right-hand axis for dual-axis charts.
    pub y2: Option<Axis>,
    /// Series bound to the right-hand axis; defaults to the second series.
    pub secondary: Option<String>,
}

impl ChartOptions {
    pub fn titled(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axes {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y2: Option<Axis>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesData {
    pub label: String,
    pub values: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub secondary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackBand {
    pub label: String,
    pub shares: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionRow {
    pub iso: String,
    pub entity: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub value: Option<f64>,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<CellFailure>,
}

/// Kind-specific data.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Series {
        years: Vec<i32>,
        series: Vec<SeriesData>,
    },
    Stack {
        years: Vec<i32>,
        totals: Vec<f64>,
        bands: Vec<StackBand>,
        zero_total_years: Vec<i32>,
    },
    Tree {
        root: SunburstNode,
        warnings: Vec<String>,
    },
    Regions {
        rows: Vec<RegionRow>,
    },
    Matrix {
        method: Method,
        labels: Vec<String>,
        cells: Vec<Vec<HeatmapCell>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartDocument {
    pub kind: ChartKind,
    pub title: String,
    pub axes: Axes,
    pub data: Payload,
}

impl ChartDocument {
    /// Pretty JSON, sorted keys, trailing newline.
    pub fn to_canonical_string(&self) -> String {
        // serde_json's default map is ordered, so a round trip through
        // Value sorts every object's keys.
        let value = serde_json::to_value(self).expect("documents are plain data");
        let mut s = serde_json::to_string_pretty(&value).expect("documents are plain data");
        s.push('\n');
        s
    }
}

/// Builds a chart document of `kind` from `input`.
pub fn emit_chart(
    kind: ChartKind,
    input: ChartInput<'_>,
    options: &ChartOptions,
) -> Result<ChartDocument, ChartError> {
    let mismatch = || ChartError::KindMismatch {
        kind,
        input: input.name(),
    };
    let data = match (kind, input) {
        (ChartKind::TimeSeries, ChartInput::Table(t)) => series_payload(t, None)?,
        (ChartKind::DualAxis, ChartInput::Table(t)) => {
            if t.columns().len() != 2 {
                return Err(ChartError::SeriesCount(t.columns().len()));
            }
            let secondary = options
                .secondary
                .clone()
                .unwrap_or_else(|| t.columns()[1].label().to_string());
            series_payload(t, Some(&secondary))?
        }
        (ChartKind::StackedArea, ChartInput::Shares(s)) => stack_payload(s),
        (ChartKind::Sunburst, ChartInput::Tree(s)) => Payload::Tree {
            root: s.root.clone(),
            warnings: s.warnings.clone(),
        },
        (ChartKind::Choropleth, ChartInput::Regions(r)) => region_payload(r)?,
        (ChartKind::Heatmap, ChartInput::Matrix(m)) => matrix_payload(m)?,
        _ => return Err(mismatch()),
    };
    Ok(ChartDocument {
        kind,
        title: options.title.clone(),
        axes: Axes {
            x: options.x.clone(),
            y: options.y.clone(),
            y2: options.y2.clone(),
        },
        data,
    })
}

fn series_payload(t: &JoinedTable, secondary: Option<&str>) -> Result<Payload, ChartError> {
    if let Some(s) = secondary {
        if !t.labels().contains(&s) {
            return Err(ChartError::UnknownSeries(s.to_string()));
        }
    }
    let series = t
        .columns()
        .iter()
        .enumerate()
        .map(|(i, c)| SeriesData {
            label: c.label().to_string(),
            values: t.values(i),
            secondary: Some(c.label()) == secondary,
        })
        .collect();
    Ok(Payload::Series {
        years: t.years().to_vec(),
        series,
    })
}

fn stack_payload(s: &ShareTable) -> Payload {
    let years: Vec<i32> = s.rows().keys().copied().collect();
    let bands = s
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| StackBand {
            label: l.clone(),
            shares: s.rows().values().map(|r| r.shares[i]).collect(),
        })
        .collect();
    Payload::Stack {
        totals: s.rows().values().map(|r| r.total).collect(),
        zero_total_years: s.zero_total_years(),
        years,
        bands,
    }
}

fn region_payload(rows: &[RegionValue]) -> Result<Payload, ChartError> {
    let missing: Vec<String> = rows
        .iter()
        .filter(|r| r.iso.as_deref().is_none_or(str::is_empty))
        .map(|r| r.entity.clone())
        .collect();
    if !missing.is_empty() {
        return Err(ChartError::MissingIsoCodes(missing));
    }
    let mut seen = BTreeSet::new();
    let mut out: Vec<RegionRow> = Vec::with_capacity(rows.len());
    for r in rows {
        let iso = r.iso.clone().expect("checked above");
        if !seen.insert(iso.clone()) {
            return Err(ChartError::DuplicateIso(iso));
        }
        out.push(RegionRow {
            iso,
            entity: r.entity.clone(),
            value: r.value,
        });
    }
    out.sort_by(|a, b| a.iso.cmp(&b.iso));
    Ok(Payload::Regions { rows: out })
}

fn matrix_payload(m: &CorrelationMatrix) -> Result<Payload, ChartError> {
    if m.size() == 0 {
        return Err(ChartError::EmptyMatrix);
    }
    let cells = (0..m.size())
        .map(|i| {
            (0..m.size())
                .map(|j| {
                    let c = m.cell(i, j);
                    HeatmapCell {
                        value: c.value,
                        n: c.n,
                        failure: c.failure,
                    }
                })
                .collect()
        })
        .collect();
    Ok(Payload::Matrix {
        method: m.method(),
        labels: m.labels().to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{integrate_on_year, AnnualSeries, JoinPolicy};
    use crate::metrics::shares_by_group;
    use std::collections::BTreeMap;

    fn two_series() -> JoinedTable {
        let a = AnnualSeries::from_points(
            "All natural disasters/count",
            [(1900, 5.0), (1901, 7.0), (1902, 6.0)],
        );
        let b = AnnualSeries::from_points(
            "anomaly",
            [(1899, -0.3), (1900, -0.2), (1901, -0.25), (1902, -0.1)],
        );
        integrate_on_year(&[a, b], JoinPolicy::Inner).unwrap()
    }

    #[test]
    fn dual_axis_marks_secondary() {
        let doc = emit_chart(
            ChartKind::DualAxis,
            ChartInput::Table(&two_series()),
            &ChartOptions::titled("t"),
        )
        .unwrap();
        let Payload::Series { years, series } = &doc.data else {
            panic!()
        };
        assert_eq!(years, &[1900, 1901, 1902]);
        assert_eq!(series.len(), 2);
        assert!(!series[0].secondary && series[1].secondary);
    }

    #[test]
    fn canonical_json_is_sorted_and_stable() {
        let doc = emit_chart(
            ChartKind::DualAxis,
            ChartInput::Table(&two_series()),
            &ChartOptions::titled("t"),
        )
        .unwrap();
        let s = doc.to_canonical_string();
        assert_eq!(s, doc.clone().to_canonical_string());
        let (axes, data, kind, title) = (
            s.find("\"axes\"").unwrap(),
            s.find("\"data\"").unwrap(),
            s.find("\"kind\"").unwrap(),
            s.find("\"title\"").unwrap(),
        );
        assert!(axes < data && data < kind && kind < title);
        assert!(s.contains("\"kind\": \"dual-axis\""));
        assert!(s.contains("-0.25"));
        assert!(s.ends_with("}\n"));
    }

    #[test]
    fn stacked_area_one_label_is_flat() {
        let t = shares_by_group(
            vec!["Flood".into()],
            &BTreeMap::from([(2000, vec![3.0]), (2001, vec![9.0])]),
        )
        .unwrap();
        let doc = emit_chart(
            ChartKind::StackedArea,
            ChartInput::Shares(&t),
            &ChartOptions::default(),
        )
        .unwrap();
        let Payload::Stack { bands, years, .. } = &doc.data else {
            panic!()
        };
        assert_eq!(years, &[2000, 2001]);
        assert_eq!(bands[0].shares, vec![1.0, 1.0]);
    }

    #[test]
    fn choropleth_needs_codes() {
        let rows = vec![
            RegionValue {
                entity: "India".into(),
                iso: Some("IND".into()),
                value: Some(1.0),
            },
            RegionValue {
                entity: "Atlantis".into(),
                iso: None,
                value: Some(2.0),
            },
        ];
        assert_eq!(
            emit_chart(
                ChartKind::Choropleth,
                ChartInput::Regions(&rows),
                &ChartOptions::default()
            ),
            Err(ChartError::MissingIsoCodes(vec!["Atlantis".into()]))
        );
    }

    #[test]
    fn choropleth_sorted_by_code() {
        let rows = vec![
            RegionValue {
                entity: "India".into(),
                iso: Some("IND".into()),
                value: Some(1.0),
            },
            RegionValue {
                entity: "China".into(),
                iso: Some("CHN".into()),
                value: None,
            },
        ];
        let doc = emit_chart(
            ChartKind::Choropleth,
            ChartInput::Regions(&rows),
            &ChartOptions::default(),
        )
        .unwrap();
        let Payload::Regions { rows } = &doc.data else {
            panic!()
        };
        assert_eq!(rows[0].iso, "CHN");
    }

    #[test]
    fn kind_mismatch_and_series_count() {
        let t = two_series();
        assert!(matches!(
            emit_chart(
                ChartKind::Sunburst,
                ChartInput::Table(&t),
                &ChartOptions::default()
            ),
            Err(ChartError::KindMismatch { .. })
        ));
        let one =
            JoinedTable::from_columns(vec![2000], vec![("a".into(), vec![Some(1.0)])]).unwrap();
        assert_eq!(
            emit_chart(
                ChartKind::DualAxis,
                ChartInput::Table(&one),
                &ChartOptions::default()
            ),
            Err(ChartError::SeriesCount(1))
        );
    }

    #[test]
    fn kind_names_parse() {
        for k in ChartKind::ALL {
            assert_eq!(k.name().parse::<ChartKind>(), Ok(k));
        }
        assert_eq!("dualaxis".parse::<ChartKind>(), Ok(ChartKind::DualAxis));
        assert_eq!(
            "StackedArea".parse::<ChartKind>(),
            Ok(ChartKind::StackedArea)
        );
    }
}
