//! Derived quantities behind the charts: rates, shares, the deaths/affected
//! hierarchy and news-coverage intensity.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::AnnualSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("population must be positive, got {0}")]
    ZeroPopulation(f64),
    #[error("deaths must be non-negative, got {0}")]
    NegativeDeaths(f64),
    #[error("negative value {value} for `{label}`{}", year.map(|y| format!(" in {y}")).unwrap_or_default())]
    NegativeValue {
        label: String,
        year: Option<i32>,
        value: f64,
    },
    #[error("row for {year} has {found} values for {expected} labels")]
    RowWidth {
        year: i32,
        expected: usize,
        found: usize,
    },
    #[error("coverage shares sum to {0}%, above 100%")]
    CoverageOverflow(f64),
}

/// Deaths per 100,000 population.
pub fn death_rate(deaths: f64, population: f64) -> Result<f64, MetricsError> {
    if population.is_nan() || population <= 0.0 {
        return Err(MetricsError::ZeroPopulation(population));
    }
    if deaths.is_nan() || deaths < 0.0 {
        return Err(MetricsError::NegativeDeaths(deaths));
    }
    Ok(deaths / population * 100_000.0)
}

/// One year of a [`ShareTable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareRow {
    /// Shares in label order.
    pub shares: Vec<f64>,
    pub total: f64,
    /// Set when every value was zero; shares are then all zero.
    pub zero_total: bool,
}

/// Per-year shares of a total across a fixed set of labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareTable {
    labels: Vec<String>,
    rows: BTreeMap<i32, ShareRow>,
}

impl ShareTable {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &BTreeMap<i32, ShareRow> {
        &self.rows
    }

    pub fn share(&self, year: i32, label: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == label)?;
        Some(self.rows.get(&year)?.shares[i])
    }

    pub fn zero_total_years(&self) -> Vec<i32> {
        self.rows
            .iter()
            .filter(|(_, r)| r.zero_total)
            .map(|(y, _)| *y)
            .collect()
    }
}

fn check_nonnegative(label: &str, year: Option<i32>, value: f64) -> Result<(), MetricsError> {
    if value.is_nan() || value < 0.0 {
        return Err(MetricsError::NegativeValue {
            label: label.to_string(),
            year,
            value,
        });
    }
    Ok(())
}

/// Shares of `values` in their sum. A zero total gives all-zero shares.
pub fn total_shares(labels: &[String], values: &[f64]) -> Result<Vec<f64>, MetricsError> {
    for (l, v) in labels.iter().zip(values) {
        check_nonnegative(l, None, *v)?;
    }
    let total: f64 = values.iter().sum();
    Ok(if total > 0.0 {
        values.iter().map(|v| v / total).collect()
    } else {
        vec![0.0; values.len()]
    })
}

/// Per-year shares. Each row holds one value per label, in label order.
pub fn shares_by_group(
    labels: Vec<String>,
    values: &BTreeMap<i32, Vec<f64>>,
) -> Result<ShareTable, MetricsError> {
    let mut rows = BTreeMap::new();
    for (&year, row) in values {
        if row.len() != labels.len() {
            return Err(MetricsError::RowWidth {
                year,
                expected: labels.len(),
                found: row.len(),
            });
        }
        for (l, v) in labels.iter().zip(row) {
            check_nonnegative(l, Some(year), *v)?;
        }
        let total: f64 = row.iter().sum();
        let shares = total_shares(&labels, row)?;
        rows.insert(
            year,
            ShareRow {
                shares,
                total,
                zero_total: total == 0.0,
            },
        );
    }
    Ok(ShareTable { labels, rows })
}

/// Shares across series over the union of their years; a missing or null
/// point counts as zero.
pub fn shares_from_series(series: &[AnnualSeries]) -> Result<ShareTable, MetricsError> {
    let labels: Vec<String> = series.iter().map(|s| s.label().to_string()).collect();
    let mut values: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for s in series {
        for y in s.present_years() {
            values.entry(y).or_insert_with(|| vec![0.0; series.len()]);
        }
    }
    for (year, row) in values.iter_mut() {
        for (slot, s) in row.iter_mut().zip(series) {
            *slot = s.get(*year).unwrap_or(0.0);
        }
    }
    shares_by_group(labels, &values)
}

/// Sum of the non-null points of a series.
pub fn series_total(s: &AnnualSeries) -> f64 {
    s.points().values().flatten().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SunburstNode {
    pub label: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<SunburstNode>,
}

impl SunburstNode {
    pub fn leaf(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            value,
            children: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Self::depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sunburst {
    pub root: SunburstNode,
    pub warnings: Vec<String>,
}

/// Per-type deaths and affected totals.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeImpact {
    pub label: String,
    pub deaths: f64,
    pub affected: f64,
}

/// Root is total affected, one child per type valued by affected, each with
/// a `deaths` grandchild. Inconsistent rows (deaths > affected) are kept as
/// given and reported in `warnings`. Types with nothing recorded are left out.
pub fn sunburst_deaths_affected(impacts: &[TypeImpact]) -> Result<Sunburst, MetricsError> {
    let mut warnings = Vec::new();
    let mut children = Vec::new();
    for t in impacts {
        check_nonnegative(&t.label, None, t.deaths)?;
        check_nonnegative(&t.label, None, t.affected)?;
        if t.deaths == 0.0 && t.affected == 0.0 {
            continue;
        }
        if t.deaths > t.affected {
            warnings.push(format!(
                "{}: deaths ({}) exceed affected ({})",
                t.label, t.deaths, t.affected
            ));
        }
        children.push(SunburstNode {
            label: t.label.clone(),
            value: t.affected,
            children: vec![SunburstNode::leaf("deaths", t.deaths)],
        });
    }
    if children.is_empty() {
        warnings.push("no deaths or affected population recorded".to_string());
    }
    let root = SunburstNode {
        label: "affected".to_string(),
        value: children.iter().map(|c| c.value).sum(),
        children,
    };
    Ok(Sunburst { root, warnings })
}

/// Deaths it takes, per percentage point of news coverage, for one type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewsIntensity {
    pub disaster_type: String,
    pub deaths: f64,
    pub coverage_share: f64,
    /// `deaths / coverage_share`; `None` when the type was never covered.
    pub deaths_per_story: Option<f64>,
    pub zero_coverage: bool,
}

/// Ranks types by deaths per unit of coverage, highest first. Uncovered
/// types go last, in input order.
pub fn news_intensity(inputs: &[(String, f64, f64)]) -> Result<Vec<NewsIntensity>, MetricsError> {
    let mut total = 0.0;
    let mut out = Vec::with_capacity(inputs.len());
    for (label, deaths, share) in inputs {
        check_nonnegative(label, None, *deaths)?;
        check_nonnegative(label, None, *share)?;
        total += share;
        let zero = *share == 0.0;
        out.push(NewsIntensity {
            disaster_type: label.clone(),
            deaths: *deaths,
            coverage_share: *share,
            deaths_per_story: (!zero).then(|| deaths / share),
            zero_coverage: zero,
        });
    }
    if total > 100.0 + 1e-9 {
        return Err(MetricsError::CoverageOverflow(total));
    }
    out.sort_by(|a, b| match (a.deaths_per_story, b.deaths_per_story) {
        (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(Ordering::Equal),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    Ok(out)
}

/// How many times more deaths `a` needs than `b` for the same coverage.
pub fn intensity_ratio(a: &NewsIntensity, b: &NewsIntensity) -> Option<f64> {
    let (x, y) = (a.deaths_per_story?, b.deaths_per_story?);
    (y > 0.0).then(|| x / y)
}
