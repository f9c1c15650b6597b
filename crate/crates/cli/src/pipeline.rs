//! Corpus build, correlation and chart assembly. Everything here returns
//! in-memory artifacts; writing them is the caller's job.

use std::fs;
use std::path::{Path, PathBuf};

use disaster_corr::charts::{
    emit_chart, render_heatmap_svg, Axis, ChartDocument, ChartInput, ChartKind, ChartOptions,
    HeatmapStyle, RegionValue,
};
use disaster_corr::corpus::{
    integrate_on_year, write_atomic, AggregateViolation, AnnualSeries, Corpus, DisasterType,
    IngestSummary, JoinPolicy, JoinedTable, Selector,
};
use disaster_corr::ingest::{coerce_records, detect_schema, read_table, Dialect, IsoCodeTable};
use disaster_corr::metrics::{
    series_total, shares_from_series, sunburst_deaths_affected, TypeImpact,
};
use disaster_corr::stats::{correlation_matrix, CorrelationMatrix, Method};
use disaster_corr::SchemaKind;

use crate::config::RunConfig;
use crate::AppError;

pub const ANOMALY_LABEL: &str = "Temperature Anomaly";

/// Which disaster measure the anomaly is correlated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Against {
    Occurrence,
    Damage,
}

impl Against {
    pub const ALL: [Against; 2] = [Self::Occurrence, Self::Damage];

    pub fn name(self) -> &'static str {
        match self {
            Self::Occurrence => "occurrence",
            Self::Damage => "damage",
        }
    }

    pub fn measure(self) -> &'static str {
        match self {
            Self::Occurrence => "count",
            Self::Damage => "economic_damage",
        }
    }
}

impl std::str::FromStr for Against {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "occurrence" | "count" | "events" => Ok(Self::Occurrence),
            "damage" | "damages" | "economic-damage" => Ok(Self::Damage),
            _ => Err(format!(
                "unknown analysis `{s}` (expected occurrence or damage)"
            )),
        }
    }
}

/// A file to be written under the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            path: path.into(),
            bytes: bytes.into(),
        }
    }
}

/// Writes every artifact under `dir` with temp-then-rename. Nothing is
/// written if a parent directory cannot be created.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, AppError> {
    for a in artifacts {
        let target = dir.join(&a.path);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| AppError::Data(format!("{}: {e}", parent.display())))?;
        }
    }
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let target = dir.join(&a.path);
        write_atomic(&target, &a.bytes)?;
        written.push(target);
    }
    Ok(written)
}

fn dialect_for(path: &Path) -> Dialect {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_lowercase();
    if matches!(ext.as_str(), "tsv" | "tab") {
        return Dialect::tab();
    }
    let first = fs::read_to_string(path)
        .ok()
        .and_then(|t| t.lines().next().map(str::to_string))
        .unwrap_or_default();
    if first.contains('\t') && !first.contains(',') {
        Dialect::tab()
    } else {
        Dialect::default()
    }
}

/// Result of building a corpus from source files.
#[derive(Debug)]
pub struct Ingested {
    pub corpus: Corpus,
    pub summaries: Vec<IngestSummary>,
    pub violations: Vec<AggregateViolation>,
}

/// Reads, validates and coerces every configured source.
pub fn ingest_sources(cfg: &RunConfig, codes: &IsoCodeTable) -> Result<Ingested, AppError> {
    let slots = [
        (SchemaKind::EadrfRegion, &cfg.region),
        (SchemaKind::EadrfType, &cfg.types),
        (SchemaKind::Ccata, &cfg.anomaly),
    ];
    if slots.iter().all(|(_, p)| p.is_none()) {
        return Err(AppError::Usage(
            "no sources given (use --region, --type, --anomaly or a config file)".into(),
        ));
    }
    let mut corpus = Corpus::new();
    let mut summaries = Vec::new();
    for (kind, path) in slots {
        let Some(path) = path else { continue };
        let table = read_table(path, dialect_for(path))?;
        let found = detect_schema(&table)?;
        if found != kind {
            return Err(AppError::Data(format!(
                "{}: expected a {kind} table, found {found} columns",
                path.display()
            )));
        }
        let coerced = coerce_records(&table, kind, codes)?;
        summaries.push(corpus.add(coerced, cfg.null_threshold)?);
    }
    let violations = corpus.aggregate_violations();
    Ok(Ingested {
        corpus,
        summaries,
        violations,
    })
}

/// Labeled series for one analysis: the anomaly, then all-disasters, then
/// each individual type.
pub fn analysis_series(corpus: &Corpus, against: Against) -> Result<Vec<AnnualSeries>, AppError> {
    let mut out = vec![corpus.anomaly_series()?.with_label(ANOMALY_LABEL)];
    let types = std::iter::once(DisasterType::AllNaturalDisasters).chain(DisasterType::INDIVIDUAL);
    for t in types {
        let s = corpus.build_series(&Selector::Type(t), against.measure())?;
        out.push(s.with_label(t.display_name()));
    }
    Ok(out)
}

/// Pairwise-complete matrix for one analysis.
pub fn correlation(
    corpus: &Corpus,
    against: Against,
    method: Method,
) -> Result<CorrelationMatrix, AppError> {
    let series = analysis_series(corpus, against)?;
    let table = integrate_on_year(&series, JoinPolicy::Outer)?;
    let m = correlation_matrix(&table, method);
    let defined = (0..m.size()).any(|i| (0..m.size()).any(|j| i != j && m.get(i, j).is_some()));
    if !defined {
        return Err(AppError::Analysis(format!(
            "{} ({method}): no pair of series has enough overlapping years",
            against.name()
        )));
    }
    Ok(m)
}

pub fn matrix_stem(against: Against, method: Method) -> String {
    format!("{}_{}", against.name(), method.name())
}

fn heatmap_title(against: Against, method: Method) -> String {
    let m = match method {
        Method::Pearson => "Pearson",
        Method::Spearman => "Spearman",
        Method::KendallTauA => "Kendall tau-a",
        Method::KendallTauB => "Kendall tau-b",
    };
    let what = match against {
        Against::Occurrence => "disaster occurrence",
        Against::Damage => "economic damage",
    };
    format!("{m} correlation: temperature anomaly vs {what}")
}

/// Matrix table and SVG heatmap for one analysis.
pub fn matrix_artifacts(
    m: &CorrelationMatrix,
    against: Against,
    dir: &Path,
) -> Result<Vec<Artifact>, AppError> {
    let stem = matrix_stem(against, m.method());
    let style = HeatmapStyle {
        title: Some(heatmap_title(against, m.method())),
        ..HeatmapStyle::default()
    };
    Ok(vec![
        Artifact::new(dir.join(format!("{stem}.csv")), m.to_delimited(b',')),
        Artifact::new(
            dir.join(format!("{stem}.svg")),
            render_heatmap_svg(m, &style)?,
        ),
    ])
}

/// `selector/measure`, or just `anomaly`.
pub fn parse_series_ref(text: &str, codes: &IsoCodeTable) -> Result<(Selector, String), AppError> {
    let (sel, measure) = match text.rsplit_once('/') {
        Some((s, m)) => (s, m.trim().to_lowercase()),
        None => (text, String::new()),
    };
    let selector = Selector::parse(sel, codes);
    if measure.is_empty() {
        if selector == Selector::Anomaly {
            return Ok((selector, "anomaly".into()));
        }
        return Err(AppError::Usage(format!(
            "series `{text}` needs a measure, e.g. `{sel}/deaths`"
        )));
    }
    Ok((selector, measure))
}

fn series_label(selector: &Selector, measure: &str) -> String {
    match selector {
        Selector::Anomaly => ANOMALY_LABEL.to_string(),
        s => format!("{s}/{measure}"),
    }
}

fn build(corpus: &Corpus, selector: &Selector, measure: &str) -> Result<AnnualSeries, AppError> {
    Ok(corpus
        .build_series(selector, measure)?
        .with_label(series_label(selector, measure)))
}

fn single_or_joined(
    series: Vec<AnnualSeries>,
    policy: JoinPolicy,
) -> Result<JoinedTable, AppError> {
    if series.len() == 1 {
        let s = &series[0];
        let years: Vec<i32> = s.points().keys().copied().collect();
        let values = years.iter().map(|y| s.get(*y)).collect();
        return Ok(JoinedTable::from_columns(
            years,
            vec![(s.label().to_string(), values)],
        )?);
    }
    Ok(integrate_on_year(&series, policy)?)
}

/// What to chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub kind: ChartKind,
    /// `selector/measure` references for time-series charts.
    pub series: Vec<String>,
    pub left: Option<String>,
    pub right: Option<String>,
    pub entity: Option<String>,
    pub disaster_type: Option<String>,
    pub measure: Option<String>,
    pub year: Option<i32>,
    pub method: Method,
    pub against: Against,
    pub title: Option<String>,
}

impl ChartSpec {
    pub fn new(kind: ChartKind) -> Self {
        Self {
            kind,
            series: Vec::new(),
            left: None,
            right: None,
            entity: None,
            disaster_type: None,
            measure: None,
            year: None,
            method: Method::Pearson,
            against: Against::Occurrence,
            title: None,
        }
    }

    /// File stem used when no name is given.
    pub fn default_name(&self) -> String {
        let mut parts = vec![self.kind.name().to_string()];
        match self.kind {
            ChartKind::TimeSeries => parts.extend(self.series_refs().iter().map(|r| slug(r))),
            ChartKind::DualAxis => parts.extend(
                [&self.left, &self.right]
                    .into_iter()
                    .flatten()
                    .map(|r| slug(r)),
            ),
            ChartKind::StackedArea => parts.push(slug(self.measure.as_deref().unwrap_or("count"))),
            ChartKind::Sunburst => parts.extend(self.year.map(|y| y.to_string())),
            ChartKind::Choropleth => {
                parts.push(slug(self.measure.as_deref().unwrap_or("deaths")));
                parts.extend(self.year.map(|y| y.to_string()));
            }
            ChartKind::Heatmap => parts.push(matrix_stem(self.against, self.method)),
        }
        parts.join("_")
    }

    fn series_refs(&self) -> Vec<String> {
        let mut refs = self.series.clone();
        let measure = self.measure.clone().unwrap_or_else(|| "deaths".into());
        if let Some(e) = &self.entity {
            refs.push(format!("{e}/{measure}"));
        }
        if let Some(t) = &self.disaster_type {
            refs.push(format!("{t}/{measure}"));
        }
        refs
    }
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

fn type_series(corpus: &Corpus, measure: &str) -> Result<Vec<AnnualSeries>, AppError> {
    DisasterType::INDIVIDUAL
        .into_iter()
        .map(|t| {
            Ok(corpus
                .build_series(&Selector::Type(t), measure)?
                .with_label(t.display_name()))
        })
        .collect()
}

fn measure_axis(measure: &str) -> Axis {
    match measure {
        "anomaly" => Axis::new("Temperature anomaly").with_unit("°C"),
        "count" => Axis::new("Reported disasters").with_unit("events"),
        "economic_damage" => Axis::new("Economic damage").with_unit("US$"),
        "death_rate" => Axis::new("Death rate").with_unit("per 100,000"),
        "percentage_share_deaths" => Axis::new("Share of deaths").with_unit("%"),
        m => Axis::new(m.replace('_', " ")),
    }
}

/// Builds one chart document from the corpus.
pub fn build_chart(
    corpus: &Corpus,
    spec: &ChartSpec,
    codes: &IsoCodeTable,
) -> Result<ChartDocument, AppError> {
    let year_axis = || Some(Axis::new("Year"));
    match spec.kind {
        ChartKind::TimeSeries => {
            let refs = spec.series_refs();
            if refs.is_empty() {
                return Err(AppError::Usage(
                    "time-series chart needs --series, --entity or --type".into(),
                ));
            }
            let mut series = Vec::new();
            let mut measures = Vec::new();
            for r in &refs {
                let (sel, m) = parse_series_ref(r, codes)?;
                series.push(build(corpus, &sel, &m)?);
                measures.push(m);
            }
            let table = single_or_joined(series, JoinPolicy::Outer)?;
            measures.dedup();
            let opts = ChartOptions {
                title: spec.title.clone().unwrap_or_else(|| refs.join(", ")),
                x: year_axis(),
                y: (measures.len() == 1).then(|| measure_axis(&measures[0])),
                ..ChartOptions::default()
            };
            Ok(emit_chart(
                ChartKind::TimeSeries,
                ChartInput::Table(&table),
                &opts,
            )?)
        }
        ChartKind::DualAxis => {
            let (Some(l), Some(r)) = (&spec.left, &spec.right) else {
                return Err(AppError::Usage(
                    "dual-axis chart needs --left and --right".into(),
                ));
            };
            let (ls, lm) = parse_series_ref(l, codes)?;
            let (rs, rm) = parse_series_ref(r, codes)?;
            let left = build(corpus, &ls, &lm)?;
            let right = build(corpus, &rs, &rm)?;
            if left.label() == right.label() {
                return Err(AppError::Usage(
                    "--left and --right name the same series".into(),
                ));
            }
            let secondary = right.label().to_string();
            let table = integrate_on_year(&[left, right], JoinPolicy::Inner)?;
            let (y0, y1) = (table.years()[0], table.years()[table.row_count() - 1]);
            let opts = ChartOptions {
                title: spec
                    .title
                    .clone()
                    .unwrap_or_else(|| format!("{l} vs {r}, {y0}-{y1}")),
                x: year_axis(),
                y: Some(measure_axis(&lm)),
                y2: Some(measure_axis(&rm)),
                secondary: Some(secondary),
            };
            Ok(emit_chart(
                ChartKind::DualAxis,
                ChartInput::Table(&table),
                &opts,
            )?)
        }
        ChartKind::StackedArea => {
            let measure = spec.measure.as_deref().unwrap_or("count");
            let shares = shares_from_series(&type_series(corpus, measure)?)?;
            let opts = ChartOptions {
                title: spec.title.clone().unwrap_or_else(|| {
                    format!("Share of {} by disaster type", measure.replace('_', " "))
                }),
                x: year_axis(),
                y: Some(Axis::new("Share").with_unit("fraction")),
                ..ChartOptions::default()
            };
            Ok(emit_chart(
                ChartKind::StackedArea,
                ChartInput::Shares(&shares),
                &opts,
            )?)
        }
        ChartKind::Sunburst => {
            let deaths = type_series(corpus, "deaths")?;
            let affected = type_series(corpus, "affected")?;
            let total = |s: &AnnualSeries| match spec.year {
                Some(y) => s.get(y).unwrap_or(0.0),
                None => series_total(s),
            };
            let impacts: Vec<TypeImpact> = deaths
                .iter()
                .zip(&affected)
                .map(|(d, a)| TypeImpact {
                    label: d.label().to_string(),
                    deaths: total(d),
                    affected: total(a),
                })
                .collect();
            let tree = sunburst_deaths_affected(&impacts)?;
            let opts =
                ChartOptions::titled(spec.title.clone().unwrap_or_else(|| match spec.year {
                    Some(y) => format!("Deaths within affected population by disaster type, {y}"),
                    None => "Deaths within affected population by disaster type".into(),
                }));
            Ok(emit_chart(
                ChartKind::Sunburst,
                ChartInput::Tree(&tree),
                &opts,
            )?)
        }
        ChartKind::Choropleth => {
            let measure = spec.measure.as_deref().unwrap_or("deaths");
            let table = corpus
                .regions
                .as_ref()
                .ok_or_else(|| AppError::Data("corpus has no eadrf-region table".into()))?;
            if !table.measures.iter().any(|m| m == measure) {
                return Err(AppError::Usage(format!(
                    "unknown region measure `{measure}`"
                )));
            }
            let year = match spec.year {
                Some(y) => y,
                None => table
                    .records
                    .iter()
                    .map(|r| r.year)
                    .max()
                    .ok_or_else(|| AppError::Data("region table is empty".into()))?,
            };
            let rows: Vec<RegionValue> = table
                .records
                .iter()
                .filter(|r| r.year == year && !r.aggregate)
                .map(|r| RegionValue {
                    entity: r.entity.clone(),
                    iso: r.iso.clone(),
                    value: r.measures.get(measure).copied().flatten(),
                })
                .collect();
            if rows.is_empty() {
                return Err(AppError::Analysis(format!("no region rows for {year}")));
            }
            let opts = ChartOptions {
                title: spec.title.clone().unwrap_or_else(|| {
                    format!("{} by country, {year}", measure_axis(measure).label)
                }),
                y: Some(measure_axis(measure)),
                ..ChartOptions::default()
            };
            Ok(emit_chart(
                ChartKind::Choropleth,
                ChartInput::Regions(&rows),
                &opts,
            )?)
        }
        ChartKind::Heatmap => {
            let m = correlation(corpus, spec.against, spec.method)?;
            let opts = ChartOptions::titled(
                spec.title
                    .clone()
                    .unwrap_or_else(|| heatmap_title(spec.against, spec.method)),
            );
            Ok(emit_chart(
                ChartKind::Heatmap,
                ChartInput::Matrix(&m),
                &opts,
            )?)
        }
    }
}

/// Chart set produced by `report`, as `(file stem, spec)`.
pub fn default_chart_specs() -> Vec<(String, ChartSpec)> {
    let mut out = Vec::new();
    let mut push = |name: &str, spec: ChartSpec| out.push((name.to_string(), spec));

    let mut deaths_map = ChartSpec::new(ChartKind::Choropleth);
    deaths_map.measure = Some("deaths".into());
    push("deaths_by_country", deaths_map);

    push(
        "deaths_within_affected",
        ChartSpec::new(ChartKind::Sunburst),
    );

    let mut rates = ChartSpec::new(ChartKind::TimeSeries);
    rates.series = vec!["World/death_rate".into(), "India/death_rate".into()];
    rates.title = Some("Disaster death rate".into());
    push("death_rate", rates);

    let mut anomaly = ChartSpec::new(ChartKind::TimeSeries);
    anomaly.series = vec!["anomaly".into()];
    anomaly.title = Some("Annual mean temperature anomaly".into());
    push("temperature_anomaly", anomaly);

    let mut occurrence = ChartSpec::new(ChartKind::StackedArea);
    occurrence.measure = Some("count".into());
    push("occurrence_share", occurrence);

    let mut dual = ChartSpec::new(ChartKind::DualAxis);
    dual.left = Some("all-disasters/count".into());
    dual.right = Some("anomaly".into());
    push("occurrence_vs_anomaly", dual);

    let mut damage = ChartSpec::new(ChartKind::StackedArea);
    damage.measure = Some("economic_damage".into());
    push("damage_share", damage);

    for against in Against::ALL {
        let mut h = ChartSpec::new(ChartKind::Heatmap);
        h.against = against;
        push(
            &format!("heatmap_{}", matrix_stem(against, Method::Pearson)),
            h,
        );
    }
    out
}

/// Flood events over all individually typed events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloodShare {
    pub flood_events: f64,
    pub all_events: f64,
    pub share: f64,
}

pub fn flood_share(corpus: &Corpus) -> Result<FloodShare, AppError> {
    let series = type_series(corpus, "count")?;
    let all_events: f64 = series.iter().map(series_total).sum();
    let flood_events = series
        .iter()
        .find(|s| s.label() == DisasterType::Flood.display_name())
        .map(series_total)
        .unwrap_or(0.0);
    if all_events <= 0.0 {
        return Err(AppError::Analysis(
            "no events recorded in the type table".into(),
        ));
    }
    Ok(FloodShare {
        flood_events,
        all_events,
        share: flood_events / all_events,
    })
}
