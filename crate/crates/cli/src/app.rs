//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use disaster_corr::charts::ChartKind;
use disaster_corr::corpus::{load_corpus, read_manifest, save_corpus, Corpus};
use disaster_corr::ingest::IsoCodeTable;
use disaster_corr::stats::Method;
use serde::Serialize;

use crate::config::{parse_method, FileConfig, Overrides, RunConfig, CORPUS_ENV};
use crate::pipeline::{
    build_chart, correlation, default_chart_specs, flood_share, ingest_sources, matrix_artifacts,
    matrix_stem, write_artifacts, Against, Artifact, ChartSpec, ANOMALY_LABEL,
};
use crate::AppError;

#[derive(Debug, Parser)]
#[command(
    name = "dcorr",
    version,
    about = "Disaster and climate correlation toolkit"
)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Corpus directory.
    #[arg(long, global = true, env = CORPUS_ENV, value_name = "DIR")]
    corpus: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and persist the corpus from source files.
    Ingest(IngestArgs),
    /// Correlation matrix table and heatmap for one analysis.
    Corr(CorrArgs),
    /// Write one chart document.
    Chart(Box<ChartArgs>),
    /// Every method, every default chart and a findings summary.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Disaster factors by country (eadrf-region).
    #[arg(long, value_name = "FILE")]
    region: Option<PathBuf>,
    /// Disaster factors by type (eadrf-type).
    #[arg(long = "type", value_name = "FILE")]
    types: Option<PathBuf>,
    /// Monthly or annual temperature anomaly (ccata).
    #[arg(long, value_name = "FILE")]
    anomaly: Option<PathBuf>,
    /// Drop measure columns with a larger null fraction.
    #[arg(long, value_name = "FRACTION")]
    null_threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct CorrArgs {
    /// pearson, spearman, kendall, tau-a or tau-b; repeatable.
    #[arg(long = "method", value_name = "METHOD")]
    methods: Vec<String>,
    /// occurrence or damage.
    #[arg(long, default_value = "occurrence")]
    against: String,
    /// Variant used for plain `kendall`.
    #[arg(long, value_name = "VARIANT")]
    kendall: Option<String>,
    /// |r| at or above this is reported as significant.
    #[arg(long)]
    significance: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ChartArgs {
    /// time-series, dual-axis, stacked-area, sunburst, choropleth or heatmap.
    #[arg(long)]
    kind: String,
    /// Entity (country or region) for a time series.
    #[arg(long)]
    entity: Option<String>,
    /// Disaster type for a time series.
    #[arg(long = "type")]
    disaster_type: Option<String>,
    #[arg(long)]
    measure: Option<String>,
    /// `selector/measure`; repeatable.
    #[arg(long)]
    series: Vec<String>,
    /// Primary-axis series of a dual-axis chart.
    #[arg(long)]
    left: Option<String>,
    /// Secondary-axis series of a dual-axis chart.
    #[arg(long)]
    right: Option<String>,
    #[arg(long)]
    year: Option<i32>,
    /// Heatmap method.
    #[arg(long)]
    method: Option<String>,
    /// Heatmap analysis.
    #[arg(long, default_value = "occurrence")]
    against: String,
    #[arg(long)]
    kendall: Option<String>,
    #[arg(long)]
    title: Option<String>,
    /// Output file stem; derived from the arguments when omitted.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    significance: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

/// Runs `dcorr` with `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match dispatch(cli, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("dcorr: error: {}", e.to_string().replace('\n', " "));
            e.code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), AppError> {
    let file = cli.config.as_deref().map(FileConfig::load).transpose()?;
    let mut over = Overrides {
        corpus: cli.corpus,
        ..Overrides::default()
    };
    match cli.command {
        Command::Ingest(a) => {
            over.region = a.region;
            over.types = a.types;
            over.anomaly = a.anomaly;
            over.null_threshold = a.null_threshold;
            ingest(&RunConfig::resolve(file, over)?, out)
        }
        Command::Corr(a) => {
            over.methods = (!a.methods.is_empty()).then_some(a.methods);
            over.kendall = a.kendall;
            over.significance = a.significance;
            over.output = a.out;
            let against = a.against.parse().map_err(AppError::Usage)?;
            corr(&RunConfig::resolve(file, over)?, against, out)
        }
        Command::Chart(a) => {
            over.kendall = a.kendall.clone();
            over.output = a.out.clone();
            let cfg = RunConfig::resolve(file, over)?;
            chart(&cfg, *a, out)
        }
        Command::Report(a) => {
            over.significance = a.significance;
            over.output = a.out;
            report(&RunConfig::resolve(file, over)?, out)
        }
    }
}

fn say(out: &mut dyn std::io::Write, text: &str) -> Result<(), AppError> {
    out.write_all(text.as_bytes())
        .map_err(|e| AppError::Data(format!("stdout: {e}")))
}

fn ingest(cfg: &RunConfig, out: &mut dyn std::io::Write) -> Result<(), AppError> {
    let ingested = ingest_sources(cfg, &IsoCodeTable::bundled())?;
    let mut text = String::new();
    for s in &ingested.summaries {
        let _ = write!(text, "{s}");
    }
    for v in &ingested.violations {
        let _ = writeln!(
            text,
            "warning: {} {} {}: members sum to {} but the aggregate row says {}",
            v.table, v.year, v.measure, v.members_sum, v.aggregate
        );
    }
    let manifest = save_corpus(&ingested.corpus, &cfg.corpus)?;
    let _ = writeln!(
        text,
        "corpus written to {} (digest {})",
        cfg.corpus.display(),
        manifest.digest
    );
    say(out, &text)
}

fn open_corpus(cfg: &RunConfig) -> Result<Corpus, AppError> {
    Ok(load_corpus(&cfg.corpus)?)
}

fn corr(cfg: &RunConfig, against: Against, out: &mut dyn std::io::Write) -> Result<(), AppError> {
    let corpus = open_corpus(cfg)?;
    let mut artifacts = Vec::new();
    let mut text = String::new();
    for &method in &cfg.methods {
        let m = correlation(&corpus, against, method)?;
        artifacts.extend(matrix_artifacts(&m, against, Path::new(""))?);
        let _ = writeln!(text, "{} ({}):", against.name(), method);
        let pairs = m.significant_pairs(cfg.significance);
        if pairs.is_empty() {
            let _ = writeln!(text, "  no pair with |r| >= {}", cfg.significance);
        }
        for (a, b, r) in pairs {
            let _ = writeln!(text, "  {a} ~ {b}: {r:.6}");
        }
    }
    for p in write_artifacts(&cfg.output, &artifacts)? {
        let _ = writeln!(text, "wrote {}", p.display());
    }
    say(out, &text)
}

fn chart(cfg: &RunConfig, a: ChartArgs, out: &mut dyn std::io::Write) -> Result<(), AppError> {
    let kind: ChartKind = a.kind.parse().map_err(AppError::Usage)?;
    let method = match a.method.as_deref() {
        Some(m) => parse_method(m, cfg.kendall)?,
        None => cfg.methods[0],
    };
    let spec = ChartSpec {
        kind,
        series: a.series,
        left: a.left,
        right: a.right,
        entity: a.entity,
        disaster_type: a.disaster_type,
        measure: a.measure.map(|m| m.to_lowercase()),
        year: a.year,
        method,
        against: a.against.parse().map_err(AppError::Usage)?,
        title: a.title,
    };
    let name = match a.name {
        Some(n) if !n.trim().is_empty() && !n.contains(['/', '\\']) => n,
        Some(n) => return Err(AppError::Usage(format!("invalid chart name `{n}`"))),
        None => spec.default_name(),
    };
    let codes = IsoCodeTable::bundled();
    let corpus = open_corpus(cfg)?;
    let doc = build_chart(&corpus, &spec, &codes)?;
    let artifact = Artifact::new(format!("{name}.chart"), doc.to_canonical_string());
    let written = write_artifacts(&cfg.output, &[artifact])?;
    say(out, &format!("wrote {}\n", written[0].display()))
}

#[derive(Debug, Serialize)]
struct SignificantPair {
    a: String,
    b: String,
    r: f64,
}

#[derive(Debug, Serialize)]
struct MatrixSummary {
    against: &'static str,
    method: Method,
    table: String,
    heatmap: String,
    /// Anomaly row, label to coefficient; `null` where undefined.
    anomaly_row: Vec<(String, Option<f64>)>,
    significant: Vec<SignificantPair>,
}

#[derive(Debug, Serialize)]
struct FloodSummary {
    flood_events: f64,
    all_events: f64,
    share: f64,
}

#[derive(Debug, Serialize)]
struct Summary {
    corpus_digest: String,
    significance: f64,
    flood_share: FloodSummary,
    matrices: Vec<MatrixSummary>,
    charts: Vec<String>,
}

fn report(cfg: &RunConfig, out: &mut dyn std::io::Write) -> Result<(), AppError> {
    let corpus = open_corpus(cfg)?;
    let digest = read_manifest(&cfg.corpus)?.digest;
    let codes = IsoCodeTable::bundled();
    let mut artifacts = Vec::new();
    let mut matrices = Vec::new();
    for against in Against::ALL {
        for method in Method::ALL {
            let m = correlation(&corpus, against, method)?;
            artifacts.extend(matrix_artifacts(&m, against, Path::new("matrices"))?);
            let stem = matrix_stem(against, method);
            let row = m
                .index_of(ANOMALY_LABEL)
                .expect("anomaly leads every analysis");
            matrices.push(MatrixSummary {
                against: against.name(),
                method,
                table: format!("matrices/{stem}.csv"),
                heatmap: format!("matrices/{stem}.svg"),
                anomaly_row: m
                    .labels()
                    .iter()
                    .enumerate()
                    .map(|(j, l)| (l.clone(), m.get(row, j)))
                    .collect(),
                significant: m
                    .significant_pairs(cfg.significance)
                    .into_iter()
                    .map(|(a, b, r)| SignificantPair {
                        a: a.into(),
                        b: b.into(),
                        r,
                    })
                    .collect(),
            });
        }
    }

    let mut charts = Vec::new();
    for (name, spec) in default_chart_specs() {
        let doc = build_chart(&corpus, &spec, &codes)?;
        let path = format!("charts/{name}.chart");
        artifacts.push(Artifact::new(path.clone(), doc.to_canonical_string()));
        charts.push(path);
    }

    let flood = flood_share(&corpus)?;
    let summary = Summary {
        corpus_digest: digest,
        significance: cfg.significance,
        flood_share: FloodSummary {
            flood_events: flood.flood_events,
            all_events: flood.all_events,
            share: flood.share,
        },
        matrices,
        charts,
    };
    let mut json = serde_json::to_string_pretty(&summary)
        .map_err(|e| AppError::Data(format!("summary: {e}")))?;
    json.push('\n');
    let text = summary_text(&summary);
    artifacts.push(Artifact::new("summary.json", json));
    artifacts.push(Artifact::new("summary.txt", text.clone()));

    let written = write_artifacts(&cfg.output, &artifacts)?;
    say(
        out,
        &format!(
            "{text}wrote {} files under {}\n",
            written.len(),
            cfg.output.display()
        ),
    )
}

fn summary_text(s: &Summary) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "corpus {}", s.corpus_digest);
    let _ = writeln!(
        t,
        "flood share of recorded events: {:.2}% ({} of {})",
        s.flood_share.share * 100.0,
        s.flood_share.flood_events,
        s.flood_share.all_events
    );
    for m in &s.matrices {
        let _ = writeln!(t, "\n{} / {}", m.against, m.method);
        for (label, r) in m.anomaly_row.iter().skip(1) {
            let r = r
                .map(|v| format!("{v:.6}"))
                .unwrap_or_else(|| "undefined".into());
            let _ = writeln!(t, "  {ANOMALY_LABEL} ~ {label}: {r}");
        }
        let _ = writeln!(
            t,
            "  pairs with |r| >= {}: {}",
            s.significance,
            m.significant.len()
        );
        for p in &m.significant {
            let _ = writeln!(t, "    {} ~ {}: {:.6}", p.a, p.b, p.r);
        }
    }
    t.push('\n');
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_is_not_an_error() {
        let help = Cli::try_parse_from(["dcorr", "--help"]).unwrap_err();
        assert!(!help.use_stderr());
        let bad = Cli::try_parse_from(["dcorr", "frobnicate"]).unwrap_err();
        assert!(bad.use_stderr());
    }

    #[test]
    fn bad_against_is_a_usage_error() {
        let cli = Cli::try_parse_from(["dcorr", "corr", "--against", "rainfall"]).unwrap();
        let mut sink = Vec::new();
        assert!(matches!(dispatch(cli, &mut sink), Err(AppError::Usage(_))));
    }
}
