//! On-disk corpus layout: `manifest.json` plus one `<name>.table` file per
//! table (comma-delimited, LF line endings, empty cell = null).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    AnomalyRecord, Corpus, CorpusError, DisasterRecord, DisasterType, Exclusion, Provenance, Table,
    TypeRecord,
};
use crate::ingest::SchemaKind;

pub const MANIFEST_FILE: &str = "manifest.json";
const FORMAT: &str = "disaster-corr-corpus/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub tables: Vec<TableEntry>,
    /// SHA-256 over the `file:sha256` lines of every table, in order.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub name: String,
    pub file: String,
    pub schema: SchemaKind,
    pub source: String,
    pub rows: usize,
    pub measures: Vec<String>,
    pub attributes: Vec<String>,
    pub excluded: Vec<Exclusion>,
    pub sha256: String,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CorpusError> {
    let name = path
        .file_name()
        .ok_or_else(|| io_err(path, "not a file path"))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
        drop(f);
        fs::rename(&tmp, path).map_err(|e| io_err(path, e))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_rows(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn region_bytes(t: &Table<DisasterRecord>) -> Vec<u8> {
    let mut header: Vec<String> = ["entity", "iso", "aggregate", "year"]
        .map(String::from)
        .to_vec();
    header.extend(t.measures.iter().cloned());
    header.extend(t.attributes.iter().cloned());
    write_rows(
        &header,
        t.records.iter().map(|r| {
            let mut row = vec![
                r.entity.clone(),
                r.iso.clone().unwrap_or_default(),
                r.aggregate.to_string(),
                r.year.to_string(),
            ];
            row.extend(
                t.measures
                    .iter()
                    .map(|m| num(r.measures.get(m).copied().flatten())),
            );
            row.extend(
                t.attributes
                    .iter()
                    .map(|a| r.attributes.get(a).cloned().flatten().unwrap_or_default()),
            );
            row
        }),
    )
}

fn type_bytes(t: &Table<TypeRecord>) -> Vec<u8> {
    let mut header: Vec<String> = vec!["disaster_type".into(), "year".into()];
    header.extend(t.measures.iter().cloned());
    write_rows(
        &header,
        t.records.iter().map(|r| {
            let mut row = vec![
                r.disaster_type.display_name().to_string(),
                r.year.to_string(),
            ];
            row.extend(
                t.measures
                    .iter()
                    .map(|m| num(r.measures.get(m).copied().flatten())),
            );
            row
        }),
    )
}

fn anomaly_bytes(t: &Table<AnomalyRecord>) -> Vec<u8> {
    let header = ["year", "month", "anomaly"].map(String::from);
    write_rows(
        &header,
        t.records.iter().map(|r| {
            vec![
                r.year.to_string(),
                r.month.map(|m| m.to_string()).unwrap_or_default(),
                num(r.anomaly),
            ]
        }),
    )
}

fn entry<R>(name: &str, t: &Table<R>, bytes: &[u8]) -> TableEntry {
    TableEntry {
        name: name.to_string(),
        file: format!("{name}.table"),
        schema: t.provenance.kind,
        source: t.provenance.source.clone(),
        rows: t.records.len(),
        measures: t.measures.clone(),
        attributes: t.attributes.clone(),
        excluded: t.provenance.excluded.clone(),
        sha256: sha256_hex(bytes),
    }
}

fn overall_digest(tables: &[TableEntry]) -> String {
    let mut h = Sha256::new();
    for t in tables {
        h.update(format!("{}:{}\n", t.file, t.sha256));
    }
    hex::encode(h.finalize())
}

/// Writes every table, then the manifest. Each file is replaced atomically.
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<Manifest, CorpusError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files: Vec<(TableEntry, Vec<u8>)> = Vec::new();
    if let Some(t) = &corpus.regions {
        let b = region_bytes(t);
        files.push((entry("region", t, &b), b));
    }
    if let Some(t) = &corpus.types {
        let b = type_bytes(t);
        files.push((entry("type", t, &b), b));
    }
    if let Some(t) = &corpus.anomalies {
        let b = anomaly_bytes(t);
        files.push((entry("anomaly", t, &b), b));
    }
    for (e, bytes) in &files {
        write_atomic(&dir.join(&e.file), bytes)?;
    }
    let tables: Vec<TableEntry> = files.into_iter().map(|(e, _)| e).collect();
    let manifest = Manifest {
        format: FORMAT.to_string(),
        digest: overall_digest(&tables),
        tables,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_atomic(&dir.join(MANIFEST_FILE), json.as_bytes())?;
    Ok(manifest)
}

/// Reads the manifest without touching the tables.
pub fn read_manifest(dir: &Path) -> Result<Manifest, CorpusError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|_| CorpusError::ManifestMissing(dir.display().to_string()))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CorpusError::Format {
        file: path.display().to_string(),
        message: e.to_string(),
    })?;
    if manifest.format != FORMAT {
        return Err(CorpusError::Format {
            file: path.display().to_string(),
            message: format!("unsupported format `{}`", manifest.format),
        });
    }
    Ok(manifest)
}

struct Rows {
    file: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Rows {
    fn err(&self, line: usize, message: impl Into<String>) -> CorpusError {
        CorpusError::Format {
            file: format!("{}:{}", self.file, line),
            message: message.into(),
        }
    }

    fn expect_header(&self, expected: &[String]) -> Result<(), CorpusError> {
        if self.header != expected {
            return Err(self.err(
                1,
                format!("header {:?}, expected {:?}", self.header, expected),
            ));
        }
        Ok(())
    }

    fn num(&self, line: usize, cell: &str) -> Result<Option<f64>, CorpusError> {
        if cell.is_empty() {
            return Ok(None);
        }
        cell.parse::<f64>()
            .map(Some)
            .map_err(|_| self.err(line, format!("bad number `{cell}`")))
    }

    fn int<T: std::str::FromStr>(&self, line: usize, cell: &str) -> Result<T, CorpusError> {
        cell.parse::<T>()
            .map_err(|_| self.err(line, format!("bad integer `{cell}`")))
    }
}

fn read_rows(path: &Path, bytes: &[u8]) -> Result<Rows, CorpusError> {
    let file = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let fmt_err = |e: csv::Error| CorpusError::Format {
        file: file.clone(),
        message: e.to_string(),
    };
    let header = reader
        .headers()
        .map_err(fmt_err)?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(rec.map_err(fmt_err)?.iter().map(String::from).collect());
    }
    Ok(Rows { file, header, rows })
}

fn measure_map(
    rows: &Rows,
    line: usize,
    measures: &[String],
    cells: &[String],
) -> Result<BTreeMap<String, Option<f64>>, CorpusError> {
    measures
        .iter()
        .zip(cells)
        .map(|(m, c)| Ok((m.clone(), rows.num(line, c)?)))
        .collect()
}

/// Loads a corpus, verifying every table against its manifest digest.
pub fn load_corpus(dir: &Path) -> Result<Corpus, CorpusError> {
    let manifest = read_manifest(dir)?;
    let mut corpus = Corpus::default();
    for e in &manifest.tables {
        let path = dir.join(&e.file);
        let bytes = fs::read(&path).map_err(|err| io_err(&path, err))?;
        let found = sha256_hex(&bytes);
        if found != e.sha256 {
            return Err(CorpusError::DigestMismatch {
                file: path.display().to_string(),
                expected: e.sha256.clone(),
                found,
            });
        }
        let rows = read_rows(&path, &bytes)?;
        if rows.rows.len() != e.rows {
            return Err(rows.err(
                0,
                format!("{} rows, manifest says {}", rows.rows.len(), e.rows),
            ));
        }
        let provenance = Provenance {
            source: e.source.clone(),
            kind: e.schema,
            excluded: e.excluded.clone(),
        };
        match e.schema {
            SchemaKind::EadrfRegion => {
                let mut header: Vec<String> = ["entity", "iso", "aggregate", "year"]
                    .map(String::from)
                    .to_vec();
                header.extend(e.measures.iter().cloned());
                header.extend(e.attributes.iter().cloned());
                rows.expect_header(&header)?;
                let nm = e.measures.len();
                let mut records = Vec::with_capacity(rows.rows.len());
                for (i, r) in rows.rows.iter().enumerate() {
                    let line = i + 2;
                    records.push(DisasterRecord {
                        entity: r[0].clone(),
                        iso: (!r[1].is_empty()).then(|| r[1].clone()),
                        aggregate: rows.int(line, &r[2])?,
                        year: rows.int(line, &r[3])?,
                        measures: measure_map(&rows, line, &e.measures, &r[4..4 + nm])?,
                        attributes: e
                            .attributes
                            .iter()
                            .zip(&r[4 + nm..])
                            .map(|(a, c)| (a.clone(), (!c.is_empty()).then(|| c.clone())))
                            .collect(),
                    });
                }
                corpus.regions = Some(Table {
                    provenance,
                    measures: e.measures.clone(),
                    attributes: e.attributes.clone(),
                    records,
                });
            }
            SchemaKind::EadrfType => {
                let mut header: Vec<String> = vec!["disaster_type".into(), "year".into()];
                header.extend(e.measures.iter().cloned());
                rows.expect_header(&header)?;
                let mut records = Vec::with_capacity(rows.rows.len());
                for (i, r) in rows.rows.iter().enumerate() {
                    let line = i + 2;
                    let disaster_type: DisasterType =
                        r[0].parse().map_err(|m: String| rows.err(line, m))?;
                    records.push(TypeRecord {
                        disaster_type,
                        year: rows.int(line, &r[1])?,
                        measures: measure_map(&rows, line, &e.measures, &r[2..])?,
                    });
                }
                corpus.types = Some(Table {
                    provenance,
                    measures: e.measures.clone(),
                    attributes: Vec::new(),
                    records,
                });
            }
            SchemaKind::Ccata => {
                rows.expect_header(&["year", "month", "anomaly"].map(String::from))?;
                let mut records = Vec::with_capacity(rows.rows.len());
                for (i, r) in rows.rows.iter().enumerate() {
                    let line = i + 2;
                    records.push(AnomalyRecord {
                        year: rows.int(line, &r[0])?,
                        month: if r[1].is_empty() {
                            None
                        } else {
                            Some(rows.int(line, &r[1])?)
                        },
                        anomaly: rows.num(line, &r[2])?,
                    });
                }
                corpus.anomalies = Some(Table {
                    provenance,
                    measures: e.measures.clone(),
                    attributes: Vec::new(),
                    records,
                });
            }
        }
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::coerced;

    fn fixture() -> Corpus {
        let mut c = Corpus::new();
        c.add(
            coerced(
                "ENTITY,CODE,YEAR,DEATHS,DEATH_RATE,SDI\nIndia,IND,2008-01-01,1734.947159,0.143342031,Medium\n\"Bonaire, Sint Eustatius\",BES,2008,,1e-7,\nWorld,,2008,1e21,0.1,\n",
            ),
            0.5,
        )
        .unwrap();
        c.add(
            coerced("ENTITY,YEAR,DEATHS,INJURED\nFlood,1982,4648,25292\nFlood,1983,1,\n"),
            0.5,
        )
        .unwrap();
        c.add(
            coerced(
                "dt,TEMPERATURE_ANOMALY\n1990-01-01,0.1\n1990-02-01,NA\n1991,-0.3333333333333333\n",
            ),
            0.5,
        )
        .unwrap();
        c
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let c = fixture();
        let m = save_corpus(&c, dir.path()).unwrap();
        assert_eq!(m.tables.len(), 3);
        let back = load_corpus(dir.path()).unwrap();
        assert_eq!(back, c);
        let region = fs::read_to_string(dir.path().join("region.table")).unwrap();
        assert_eq!(
            region,
            "entity,iso,aggregate,year,deaths,death_rate,sdi\n\
             India,IND,false,2008,1734.947159,0.143342031,Medium\n\
             \"Bonaire, Sint Eustatius\",BES,false,2008,,0.0000001,\n\
             World,,true,2008,1000000000000000000000,0.1,\n"
        );
    }

    #[test]
    fn saving_twice_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let c = fixture();
        save_corpus(&c, a.path()).unwrap();
        save_corpus(&c, b.path()).unwrap();
        for f in [
            "manifest.json",
            "region.table",
            "type.table",
            "anomaly.table",
        ] {
            assert_eq!(
                fs::read(a.path().join(f)).unwrap(),
                fs::read(b.path().join(f)).unwrap()
            );
        }
    }

    #[test]
    fn tampering_detected() {
        let dir = tempfile::tempdir().unwrap();
        save_corpus(&fixture(), dir.path()).unwrap();
        let p = dir.path().join("type.table");
        let text = fs::read_to_string(&p).unwrap().replace("4648", "4649");
        fs::write(&p, text).unwrap();
        assert!(matches!(
            load_corpus(dir.path()),
            Err(CorpusError::DigestMismatch { .. })
        ));
    }

    #[test]
    fn missing_manifest() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_corpus(dir.path()),
            Err(CorpusError::ManifestMissing(_))
        ));
    }

    #[test]
    fn empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let m = save_corpus(&Corpus::new(), dir.path()).unwrap();
        assert!(m.tables.is_empty());
        assert!(load_corpus(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn exclusions_recorded_in_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = Corpus::new();
        c.add(
            coerced("ENTITY,YEAR,DEATHS,HOMELESS\nFlood,1990,1,\nFlood,1991,2,\n"),
            0.3,
        )
        .unwrap();
        let m = save_corpus(&c, dir.path()).unwrap();
        assert_eq!(m.tables[0].excluded[0].column, "homeless");
        assert_eq!(load_corpus(dir.path()).unwrap(), c);
    }
}
