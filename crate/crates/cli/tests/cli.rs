use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn snapshot(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/snapshot")
        .join(file)
}

fn dcorr(args: &[&str], env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dcorr"));
    cmd.args(args).env_remove("DCORR_CORPUS");
    if let Some(dir) = env {
        cmd.env("DCORR_CORPUS", dir);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ingest_snapshot(corpus: &Path) {
    let o = dcorr(
        &[
            "--corpus",
            s(corpus),
            "ingest",
            "--region",
            s(&snapshot("eadrf_region.csv")),
            "--type",
            s(&snapshot("eadrf_type.csv")),
            "--anomaly",
            s(&snapshot("ccata.csv")),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = dcorr(&["explode"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn ingest_prints_null_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let o = dcorr(
        &[
            "--corpus",
            s(&corpus),
            "ingest",
            "--type",
            s(&snapshot("eadrf_type.csv")),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("economic_damage"));
    assert!(out.contains("no columns excluded"));
    assert!(corpus.join("manifest.json").is_file());
}

#[test]
fn null_threshold_excludes_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = dcorr(
        &[
            "--corpus",
            s(dir.path()),
            "ingest",
            "--type",
            s(&snapshot("eadrf_type.csv")),
            "--null-threshold",
            "0.05",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("excluded `economic_damage`"));
}

#[test]
fn ragged_input_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "ENTITY,YEAR,DEATHS\nFlood,1990,3\nFlood,1991\n").unwrap();
    let o = dcorr(
        &[
            "--corpus",
            s(&dir.path().join("c")),
            "ingest",
            "--type",
            s(&bad),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.csv:3"), "{err}");
    assert_eq!(err.lines().count(), 1);
    assert!(!dir.path().join("c").exists());
}

#[test]
fn source_in_wrong_slot_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = dcorr(
        &[
            "--corpus",
            s(dir.path()),
            "ingest",
            "--region",
            s(&snapshot("ccata.csv")),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_corpus_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = dcorr(&["--corpus", s(&dir.path().join("nowhere")), "corr"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("dcorr: error:"));
}

#[test]
fn disjoint_years_are_an_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    let types = dir.path().join("t.csv");
    let anomaly = dir.path().join("a.csv");
    fs::write(
        &types,
        "ENTITY,YEAR,COUNT\nFlood,1900,3\nFlood,1901,4\nFlood,1902,1\n",
    )
    .unwrap();
    fs::write(
        &anomaly,
        "YEAR,TEMPERATURE_ANOMALY\n1950,0.1\n1951,0.2\n1952,0.0\n",
    )
    .unwrap();
    let corpus = dir.path().join("c");
    let o = dcorr(
        &[
            "--corpus",
            s(&corpus),
            "ingest",
            "--type",
            s(&types),
            "--anomaly",
            s(&anomaly),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = dcorr(
        &[
            "--corpus",
            s(&corpus),
            "chart",
            "--kind",
            "dual-axis",
            "--left",
            "flood/count",
            "--right",
            "anomaly",
            "--out",
            s(dir.path()),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("share no year"));
}

#[test]
fn chart_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    ingest_snapshot(&corpus);
    let run = |args: &[&str]| {
        let mut all = vec!["--corpus", s(&corpus), "chart", "--out", s(dir.path())];
        all.extend_from_slice(args);
        dcorr(&all, None).status.code()
    };
    assert_eq!(run(&["--kind", "pie"]), Some(1));
    assert_eq!(run(&["--kind", "dual-axis", "--left", "anomaly"]), Some(1));
    assert_eq!(
        run(&["--kind", "time-series", "--series", "flood/rainfall"]),
        Some(1)
    );
    assert_eq!(
        run(&["--kind", "time-series", "--series", "India"]),
        Some(1)
    );
    assert_eq!(
        run(&[
            "--kind",
            "time-series",
            "--entity",
            "India",
            "--measure",
            "deaths"
        ]),
        Some(0)
    );
}

#[test]
fn dual_axis_document() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    ingest_snapshot(&corpus);
    let o = dcorr(
        &[
            "chart",
            "--kind",
            "dualaxis",
            "--left",
            "all-disasters/count",
            "--right",
            "anomaly",
            "--name",
            "dual",
            "--out",
            s(dir.path()),
        ],
        Some(&corpus),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("dual.chart")).unwrap()).unwrap();
    assert_eq!(doc["kind"], "dual-axis");
    let years = doc["data"]["years"].as_array().unwrap();
    assert_eq!(years.first().unwrap(), 1900);
    assert_eq!(years.last().unwrap(), 2015);
    let series = doc["data"]["series"].as_array().unwrap();
    assert_eq!(series.len(), 2);
    assert_eq!(series[1]["secondary"], true);
}

#[test]
fn choropleth_rows_carry_iso_codes() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    ingest_snapshot(&corpus);
    let o = dcorr(
        &[
            "--corpus",
            s(&corpus),
            "chart",
            "--kind",
            "choropleth",
            "--year",
            "2008",
            "--name",
            "m",
            "--out",
            s(dir.path()),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.chart")).unwrap()).unwrap();
    let rows = doc["data"]["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["iso"].as_str().unwrap().len() == 3));
    assert!(!rows.iter().any(|r| r["entity"] == "World"));
    let india = rows.iter().find(|r| r["iso"] == "IND").unwrap();
    assert_eq!(india["value"], 1734.947159);
}

#[test]
fn flag_beats_env_beats_config() {
    let dir = tempfile::tempdir().unwrap();
    let real = dir.path().join("real");
    ingest_snapshot(&real);
    let cfg = dir.path().join("dcorr.toml");
    fs::write(&cfg, "corpus = \"from-config\"\noutput = \"out\"\n").unwrap();
    let corr = |extra: &[&str], env: Option<&Path>| {
        let mut args = vec!["--config", s(&cfg)];
        args.extend_from_slice(extra);
        args.push("corr");
        dcorr(&args, env).status.code()
    };
    // config alone points at a corpus that does not exist
    assert_eq!(corr(&[], None), Some(2));
    assert_eq!(corr(&[], Some(&real)), Some(0));
    assert_eq!(
        corr(&["--corpus", s(&real)], Some(&dir.path().join("bogus"))),
        Some(0)
    );
    assert_eq!(
        corr(&["--corpus", s(&dir.path().join("bogus"))], Some(&real)),
        Some(2)
    );
    assert!(dir.path().join("out/occurrence_pearson.csv").is_file());
}

#[test]
fn corr_writes_table_and_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    ingest_snapshot(&corpus);
    let out = dir.path().join("o");
    let o = dcorr(
        &[
            "--corpus",
            s(&corpus),
            "corr",
            "--method",
            "kendall",
            "--kendall",
            "tau-b",
            "--method",
            "spearman",
            "--against",
            "damage",
            "--out",
            s(&out),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in [
        "damage_kendall-tau-b.csv",
        "damage_kendall-tau-b.svg",
        "damage_spearman.csv",
        "damage_spearman.svg",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let leftovers: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn bad_thresholds_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = dcorr(
        &["--corpus", s(dir.path()), "corr", "--significance", "1.5"],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    let o = dcorr(
        &["--corpus", s(dir.path()), "corr", "--method", "median"],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
}
