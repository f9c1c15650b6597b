use std::collections::BTreeMap;
use std::fmt;

use crate::corpus::{
    AnomalyRecord, DisasterRecord, DisasterType, TypeRecord, NONNEGATIVE_MEASURES,
};

use super::iso::{normalize_entity, IsoCodeTable};
use super::schema::ColumnLayout;
use super::{IngestError, RawTable, SchemaKind};

pub const MIN_YEAR: i64 = 1850;
pub const MAX_YEAR: i64 = 2100;

/// Empty cells and the literal tokens `NA` / `null` (any case) are nulls.
pub(crate) fn is_null(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("null")
}

pub(crate) fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses `YYYY`, `YYYY-MM` or `YYYY-MM-DD` into `(year, month)`.
pub fn parse_year(cell: &str) -> Option<(i64, Option<u8>)> {
    let mut parts = cell.trim().split('-');
    let year = parts.next()?;
    if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let year: i64 = year.parse().ok()?;
    let month = match parts.next() {
        None => None,
        Some(m) => {
            let m: u8 = m.parse().ok().filter(|m| (1..=12).contains(m))?;
            Some(m)
        }
    };
    if let Some(d) = parts.next() {
        d.parse::<u8>().ok().filter(|d| (1..=31).contains(d))?;
    }
    if parts.next().is_some() {
        return None;
    }
    Some((year, month))
}

/// Null counts for one column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnNulls {
    pub column: String,
    pub nulls: usize,
}

/// Per-column null counts over every input row of a table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NullReport {
    pub rows: usize,
    pub columns: Vec<ColumnNulls>,
}

impl NullReport {
    pub fn nulls(&self, column: &str) -> Option<usize> {
        self.columns
            .iter()
            .find(|c| c.column == column)
            .map(|c| c.nulls)
    }

    pub fn fraction(&self, column: &str) -> Option<f64> {
        let n = self.nulls(column)?;
        Some(if self.rows == 0 {
            0.0
        } else {
            n as f64 / self.rows as f64
        })
    }
}

impl fmt::Display for NullReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} rows", self.rows)?;
        for c in &self.columns {
            let frac = if self.rows == 0 {
                0.0
            } else {
                c.nulls as f64 / self.rows as f64
            };
            writeln!(
                f,
                "  {:<28} {:>7} nulls ({:>6.2}%)",
                c.column,
                c.nulls,
                frac * 100.0
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Region(Vec<DisasterRecord>),
    Type(Vec<TypeRecord>),
    Anomaly(Vec<AnomalyRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Self::Region(r) => r.len(),
            Self::Type(r) => r.len(),
            Self::Anomaly(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Output of [`coerce_records`]: the rows that coerced cleanly, plus one
/// error per row that did not. `records.len() + rejects.len()` always equals
/// the number of input rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Coerced {
    pub kind: SchemaKind,
    pub source_path: String,
    pub measures: Vec<String>,
    pub attributes: Vec<String>,
    pub records: Records,
    pub nulls: NullReport,
    pub rejects: Vec<IngestError>,
}

impl Coerced {
    /// Fails with the first rejected row, if any.
    pub fn strict(self) -> Result<Self, IngestError> {
        match self.rejects.first() {
            Some(e) => Err(e.clone()),
            None => Ok(self),
        }
    }
}

struct RowCtx<'a> {
    path: &'a str,
    line: u64,
}

impl RowCtx<'_> {
    fn year(&self, cell: &str) -> Result<(i32, Option<u8>), IngestError> {
        let (year, month) = parse_year(cell).ok_or_else(|| IngestError::InvalidDate {
            path: self.path.to_string(),
            line: self.line,
            value: cell.to_string(),
        })?;
        if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
            return Err(IngestError::YearOutOfRange {
                path: self.path.to_string(),
                line: self.line,
                year,
            });
        }
        Ok((year as i32, month))
    }

    fn number(&self, cell: &str, column: &str) -> Result<Option<f64>, IngestError> {
        if is_null(cell) {
            return Ok(None);
        }
        let v = parse_number(cell).ok_or_else(|| IngestError::UnparseableNumber {
            path: self.path.to_string(),
            line: self.line,
            column: column.to_string(),
            value: cell.to_string(),
        })?;
        if v < 0.0 && NONNEGATIVE_MEASURES.contains(&column) {
            return Err(IngestError::NegativeMeasure {
                path: self.path.to_string(),
                line: self.line,
                column: column.to_string(),
                value: v,
            });
        }
        Ok(Some(v))
    }

    fn measures(
        &self,
        row: &[String],
        layout: &ColumnLayout,
    ) -> Result<BTreeMap<String, Option<f64>>, IngestError> {
        layout
            .measures
            .iter()
            .map(|(i, name)| Ok((name.clone(), self.number(&row[*i], name)?)))
            .collect()
    }
}

/// Converts string cells to typed records for `kind`.
///
/// Rows that fail (bad number, bad year, unknown disaster type, ...) are
/// reported in [`Coerced::rejects`] rather than dropped.
pub fn coerce_records(
    table: &RawTable,
    kind: SchemaKind,
    codes: &IsoCodeTable,
) -> Result<Coerced, IngestError> {
    let layout = ColumnLayout::resolve(table, kind)?;
    let path = table.source_path();

    let mut null_columns: Vec<(usize, String)> = layout.measures.clone();
    if let Some(a) = layout.anomaly {
        null_columns.push((a, "anomaly".to_string()));
    }
    let nulls = NullReport {
        rows: table.len(),
        columns: null_columns
            .iter()
            .map(|(i, name)| ColumnNulls {
                column: name.clone(),
                nulls: table.rows().iter().filter(|r| is_null(&r[*i])).count(),
            })
            .collect(),
    };

    let mut rejects = Vec::new();
    let records = match kind {
        SchemaKind::EadrfRegion => {
            let mut out = Vec::new();
            for (i, row) in table.rows().iter().enumerate() {
                let ctx = RowCtx {
                    path,
                    line: table.line_of(i),
                };
                match region_record(&ctx, row, &layout, codes) {
                    Ok(r) => out.push(r),
                    Err(e) => rejects.push(e),
                }
            }
            Records::Region(out)
        }
        SchemaKind::EadrfType => {
            let mut out = Vec::new();
            for (i, row) in table.rows().iter().enumerate() {
                let ctx = RowCtx {
                    path,
                    line: table.line_of(i),
                };
                match type_record(&ctx, row, &layout) {
                    Ok(r) => out.push(r),
                    Err(e) => rejects.push(e),
                }
            }
            Records::Type(out)
        }
        SchemaKind::Ccata => {
            let mut out = Vec::new();
            for (i, row) in table.rows().iter().enumerate() {
                let ctx = RowCtx {
                    path,
                    line: table.line_of(i),
                };
                match anomaly_record(&ctx, row, &layout) {
                    Ok(r) => out.push(r),
                    Err(e) => rejects.push(e),
                }
            }
            Records::Anomaly(out)
        }
    };

    Ok(Coerced {
        kind,
        source_path: path.to_string(),
        measures: layout.measures.iter().map(|(_, m)| m.clone()).collect(),
        attributes: layout.attributes.iter().map(|(_, a)| a.clone()).collect(),
        records,
        nulls,
        rejects,
    })
}

fn region_record(
    ctx: &RowCtx<'_>,
    row: &[String],
    layout: &ColumnLayout,
    codes: &IsoCodeTable,
) -> Result<DisasterRecord, IngestError> {
    let raw_entity = layout.entity.map_or("", |i| row[i].as_str());
    if raw_entity.trim().is_empty() {
        return Err(IngestError::MissingEntity {
            path: ctx.path.to_string(),
            line: ctx.line,
        });
    }
    let entity = normalize_entity(raw_entity, codes);
    let source_code = layout
        .code
        .map(|i| row[i].trim())
        .filter(|c| c.len() == 3 && c.bytes().all(|b| b.is_ascii_uppercase()));
    let iso = match (&entity.code, source_code) {
        (Some(c), _) => Some(c.clone()),
        (None, Some(c)) if !entity.aggregate => Some(c.to_string()),
        _ => None,
    };
    let (year, _) = ctx.year(&row[layout.date])?;
    let measures = ctx.measures(row, layout)?;
    let attributes = layout
        .attributes
        .iter()
        .map(|(i, name)| {
            let v = (!is_null(&row[*i])).then(|| row[*i].trim().to_string());
            (name.clone(), v)
        })
        .collect();
    Ok(DisasterRecord {
        entity: entity.name,
        iso,
        aggregate: entity.aggregate,
        year,
        measures,
        attributes,
    })
}

fn type_record(
    ctx: &RowCtx<'_>,
    row: &[String],
    layout: &ColumnLayout,
) -> Result<TypeRecord, IngestError> {
    let raw = layout.entity.map_or("", |i| row[i].as_str());
    if raw.trim().is_empty() {
        return Err(IngestError::MissingEntity {
            path: ctx.path.to_string(),
            line: ctx.line,
        });
    }
    let disaster_type: DisasterType =
        raw.parse().map_err(|_| IngestError::UnknownDisasterType {
            path: ctx.path.to_string(),
            line: ctx.line,
            value: raw.to_string(),
        })?;
    let (year, _) = ctx.year(&row[layout.date])?;
    Ok(TypeRecord {
        disaster_type,
        year,
        measures: ctx.measures(row, layout)?,
    })
}

fn anomaly_record(
    ctx: &RowCtx<'_>,
    row: &[String],
    layout: &ColumnLayout,
) -> Result<AnomalyRecord, IngestError> {
    let (year, month) = ctx.year(&row[layout.date])?;
    let column = layout.anomaly.expect("ccata layout has an anomaly column");
    let anomaly = ctx.number(&row[column], "anomaly")?;
    if let Some(a) = anomaly {
        if a.abs() >= 10.0 {
            return Err(IngestError::AnomalyOutOfBounds {
                path: ctx.path.to_string(),
                line: ctx.line,
                value: a,
            });
        }
    }
    Ok(AnomalyRecord {
        year,
        month,
        anomaly,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{detect_schema, parse_delimited, Dialect};

    fn table(text: &str) -> RawTable {
        parse_delimited(text.as_bytes(), Dialect::default(), "mem").unwrap()
    }

    fn coerce(text: &str) -> Coerced {
        let t = table(text);
        let kind = detect_schema(&t).unwrap();
        coerce_records(&t, kind, &IsoCodeTable::bundled()).unwrap()
    }

    const REGION_HEADER: &str = "ENTITY,CODE,YEAR,DEATHS,DEATH_RATE,PERCENTAGE_SHARE_DEATHS,INTERNALLY_DISPLACED_POPULATION\n";

    #[test]
    fn first_region_row() {
        let c = coerce(&format!(
            "{REGION_HEADER}India,IND,2008-01-01,1734.947159,0.143342031,0.019412573,6662000\n"
        ));
        let Records::Region(rows) = c.records else {
            panic!()
        };
        let r = &rows[0];
        assert_eq!(r.entity, "India");
        assert_eq!(r.iso.as_deref(), Some("IND"));
        assert_eq!(r.year, 2008);
        assert_eq!(r.measures["deaths"], Some(1734.947159));
        assert_eq!(r.measures["death_rate"], Some(0.143342031));
        // share column is kept verbatim, never rescaled
        assert_eq!(r.measures["percentage_share_deaths"], Some(0.019412573));
        assert_eq!(r.measures["internally_displaced"], Some(6662000.0));
    }

    #[test]
    fn empty_and_na_cells_are_nulls() {
        let c = coerce(&format!(
            "{REGION_HEADER}India,IND,2008,,NA,null,1\nIndia,IND,2009,2,3,4,\n"
        ));
        let Records::Region(rows) = &c.records else {
            panic!()
        };
        assert_eq!(rows[0].measures["deaths"], None);
        assert_eq!(rows[0].measures["death_rate"], None);
        assert_eq!(rows[0].measures["percentage_share_deaths"], None);
        assert_eq!(c.nulls.nulls("deaths"), Some(1));
        assert_eq!(c.nulls.nulls("internally_displaced"), Some(1));
        assert_eq!(c.nulls.fraction("deaths"), Some(0.5));
    }

    #[test]
    fn malformed_number_is_rejected_not_dropped() {
        let c = coerce(&format!(
            "{REGION_HEADER}India,IND,2008,12a4,1,1,1\nIndia,IND,2009,1,1,1,1\n"
        ));
        assert_eq!(c.records.len(), 1);
        assert_eq!(c.rejects.len(), 1);
        match &c.rejects[0] {
            IngestError::UnparseableNumber {
                line,
                column,
                value,
                ..
            } => {
                assert_eq!(
                    (*line, column.as_str(), value.as_str()),
                    (2, "deaths", "12a4")
                );
            }
            other => panic!("{other:?}"),
        }
        assert!(c.strict().is_err());
    }

    #[test]
    fn year_forms_and_range() {
        assert_eq!(parse_year("2008-01-01"), Some((2008, Some(1))));
        assert_eq!(parse_year("2008"), Some((2008, None)));
        assert_eq!(parse_year("1990-07"), Some((1990, Some(7))));
        assert_eq!(parse_year("2008-13-01"), None);
        assert_eq!(parse_year("08"), None);
        let c = coerce("YEAR,TEMPERATURE_ANOMALY\n1700,0.1\n2101-01-01,0.2\n2000,0.3\n");
        assert_eq!(c.records.len(), 1);
        assert!(c
            .rejects
            .iter()
            .all(|e| matches!(e, IngestError::YearOutOfRange { .. })));
    }

    #[test]
    fn type_rows() {
        let c = coerce(
            "ENTITY,YEAR,DEATHS,AFFECTED,HOMELESS,INJURED\nFlood,1982-01-01,4648,36917037,372410,25292\nFood shortage,1982,1,1,1,1\n",
        );
        let Records::Type(rows) = &c.records else {
            panic!()
        };
        assert_eq!(rows[0].disaster_type, DisasterType::Flood);
        assert_eq!(rows[0].measures["injured"], Some(25292.0));
        assert!(matches!(
            c.rejects[0],
            IngestError::UnknownDisasterType { .. }
        ));
    }

    #[test]
    fn negative_counts_and_anomaly_bounds() {
        let c = coerce("ENTITY,YEAR,DEATHS\nFlood,1990,-1\n");
        assert!(matches!(c.rejects[0], IngestError::NegativeMeasure { .. }));
        let c = coerce("dt,TEMPERATURE_ANOMALY\n1990-01-01,12\n1990-02-01,-0.4\n1990-03-01,\n");
        assert!(matches!(
            c.rejects[0],
            IngestError::AnomalyOutOfBounds { .. }
        ));
        let Records::Anomaly(rows) = &c.records else {
            panic!()
        };
        assert_eq!(
            rows[0],
            AnomalyRecord {
                year: 1990,
                month: Some(2),
                anomaly: Some(-0.4)
            }
        );
        assert_eq!(rows[1].anomaly, None);
    }

    #[test]
    fn aggregate_region_rows_have_no_code() {
        let c = coerce(&format!(
            "{REGION_HEADER}World,OWID_WRL,2008,1,1,1,1\nUSA,,2008,1,1,1,1\n"
        ));
        let Records::Region(rows) = &c.records else {
            panic!()
        };
        assert!(rows[0].aggregate && rows[0].iso.is_none());
        assert_eq!(rows[1].entity, "United States");
        assert_eq!(rows[1].iso.as_deref(), Some("USA"));
    }
}
