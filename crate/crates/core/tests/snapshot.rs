use std::path::PathBuf;

use disaster_corr::corpus::{load_corpus, save_corpus, DisasterType, Selector};
use disaster_corr::ingest::{coerce_records, detect_schema, read_table, Dialect};
use disaster_corr::{Corpus, IsoCodeTable, SchemaKind};

fn snapshot(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/snapshot")
        .join(file)
}

fn load() -> Corpus {
    let codes = IsoCodeTable::bundled();
    let mut corpus = Corpus::new();
    for (file, kind) in [
        ("eadrf_region.csv", SchemaKind::EadrfRegion),
        ("eadrf_type.csv", SchemaKind::EadrfType),
        ("ccata.csv", SchemaKind::Ccata),
    ] {
        let table = read_table(&snapshot(file), Dialect::default()).unwrap();
        assert_eq!(detect_schema(&table).unwrap(), kind, "{file}");
        corpus
            .add(coerce_records(&table, kind, &codes).unwrap(), 0.30)
            .unwrap();
    }
    corpus
}

#[test]
fn table_sizes() {
    let c = load();
    assert_eq!(c.regions.as_ref().unwrap().records.len(), 6469);
    assert_eq!(c.types.as_ref().unwrap().records.len(), 757);
    let anomaly = c.anomaly_series().unwrap();
    assert_eq!(anomaly.present_years().len(), 166);
}

#[test]
fn verbatim_rows_survive_ingest() {
    let c = load();
    let codes = IsoCodeTable::bundled();
    let india = |m: &str| {
        c.build_series(&Selector::parse("India", &codes), m)
            .unwrap()
    };
    assert_eq!(india("deaths").get(2008), Some(1734.947159));
    assert_eq!(india("death_rate").get(2008), Some(0.143342031));
    assert_eq!(india("deaths").get(2013), Some(6556.513259));
    assert_eq!(india("death_rate").get(2016), Some(0.059180022));

    let flood = |m: &str| {
        c.build_series(&Selector::Type(DisasterType::Flood), m)
            .unwrap()
    };
    assert_eq!(flood("deaths").get(2010), Some(8356.0));
    assert_eq!(flood("affected").get(1994), Some(122546263.0));
    assert_eq!(flood("injured").get(1965), Some(15245.0));
}

#[test]
fn aggregates_cover_their_members() {
    assert!(load().aggregate_violations().is_empty());
}

#[test]
fn persisted_corpus_reloads_identically() {
    let c = load();
    let dir = tempfile::tempdir().unwrap();
    let a = save_corpus(&c, dir.path()).unwrap();
    assert_eq!(load_corpus(dir.path()).unwrap(), c);
    let other = tempfile::tempdir().unwrap();
    assert_eq!(save_corpus(&c, other.path()).unwrap().digest, a.digest);
}
