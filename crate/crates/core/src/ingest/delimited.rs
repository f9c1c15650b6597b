use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::IngestError;

/// Delimiter and quote configuration for a source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dialect {
    pub delimiter: u8,
    pub quote: u8,
}

impl Default for Dialect {
    fn default() -> Self {
        Self {
            delimiter: b',',
            quote: b'"',
        }
    }
}

impl Dialect {
    pub fn tab() -> Self {
        Self {
            delimiter: b'\t',
            ..Self::default()
        }
    }
}

/// A header plus string cells, exactly as read from a delimited file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    lines: Vec<u64>,
    source_path: String,
}

impl RawTable {
    /// Builds a table from in-memory parts, enforcing the same invariants as
    /// [`parse_delimited`]. Line numbers are assumed to be consecutive.
    pub fn new(
        source_path: impl Into<String>,
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    ) -> Result<Self, IngestError> {
        let source_path = source_path.into();
        let header = checked_header(&source_path, header)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(IngestError::RaggedRow {
                    path: source_path,
                    line: i as u64 + 2,
                    expected: header.len(),
                    found: row.len(),
                });
            }
        }
        let lines = (0..rows.len() as u64).map(|i| i + 2).collect();
        Ok(Self {
            header,
            rows,
            lines,
            source_path,
        })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    /// 1-based line in the source file where data row `row` started.
    pub fn line_of(&self, row: usize) -> u64 {
        self.lines[row]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Re-serializes the table with LF line endings.
    pub fn to_delimited(&self, dialect: Dialect) -> String {
        let mut writer = csv::WriterBuilder::new()
            .delimiter(dialect.delimiter)
            .quote(dialect.quote)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // Writing into a Vec cannot fail.
        writer.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row).expect("in-memory write");
        }
        let bytes = writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("cells are UTF-8")
    }
}

fn checked_header(path: &str, header: Vec<String>) -> Result<Vec<String>, IngestError> {
    let header: Vec<String> = header
        .into_iter()
        .enumerate()
        .map(|(i, h)| {
            let h = if i == 0 {
                h.trim_start_matches('\u{feff}')
            } else {
                &h
            };
            h.trim().to_string()
        })
        .collect();
    let mut seen = HashSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(IngestError::DuplicateHeader {
                path: path.to_string(),
                name: name.clone(),
            });
        }
    }
    Ok(header)
}

/// Parses UTF-8 delimited text whose first record is the header.
///
/// Blank lines are skipped. Every data row must have exactly as many cells
/// as the header.
pub fn parse_delimited<R: Read>(
    mut input: R,
    dialect: Dialect,
    source_path: &str,
) -> Result<RawTable, IngestError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| IngestError::Io {
        path: source_path.to_string(),
        message: e.to_string(),
    })?;
    // Line numbers are derived from byte offsets; the reader's own line
    // counter does not count skipped blank lines.
    let newlines: Vec<usize> = bytes
        .iter()
        .enumerate()
        .filter(|(_, b)| **b == b'\n')
        .map(|(i, _)| i)
        .collect();
    let line_at = |offset: u64| {
        // a record's reported start may sit on the blank lines before it
        let mut start = offset as usize;
        while start < bytes.len() && matches!(bytes[start], b'\n' | b'\r') {
            start += 1;
        }
        newlines.partition_point(|&n| n < start) as u64 + 1
    };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(dialect.delimiter)
        .quote(dialect.quote)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes.as_slice());

    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| csv_error(source_path, e))?;
        let line = record.position().map_or(0, |p| line_at(p.byte()));
        let cells: Vec<String> = record.iter().map(str::to_string).collect();
        match &header {
            None => header = Some(checked_header(source_path, cells)?),
            Some(h) => {
                if cells.len() != h.len() {
                    return Err(IngestError::RaggedRow {
                        path: source_path.to_string(),
                        line,
                        expected: h.len(),
                        found: cells.len(),
                    });
                }
                rows.push(cells);
                lines.push(line);
            }
        }
    }
    let header = header.ok_or_else(|| IngestError::EmptyInput {
        path: source_path.to_string(),
    })?;
    Ok(RawTable {
        header,
        rows,
        lines,
        source_path: source_path.to_string(),
    })
}

/// Reads and parses a delimited file from disk.
pub fn read_table(path: &Path, dialect: Dialect) -> Result<RawTable, IngestError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| IngestError::Io {
        path: display.clone(),
        message: e.to_string(),
    })?;
    parse_delimited(std::io::BufReader::new(file), dialect, &display)
}

fn csv_error(path: &str, err: csv::Error) -> IngestError {
    let line = err.position().map_or(0, |p| p.line());
    match err.kind() {
        csv::ErrorKind::Io(io) => IngestError::Io {
            path: path.to_string(),
            message: io.to_string(),
        },
        csv::ErrorKind::Utf8 { .. } => IngestError::Malformed {
            path: path.to_string(),
            line,
            message: "invalid UTF-8".to_string(),
        },
        _ => IngestError::Malformed {
            path: path.to_string(),
            line,
            message: err.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RawTable, IngestError> {
        parse_delimited(text.as_bytes(), Dialect::default(), "mem")
    }

    #[test]
    fn minimal_table() {
        let t = parse("a,b\n1,2\n").unwrap();
        assert_eq!(t.header(), ["a", "b"]);
        assert_eq!(t.rows(), [vec!["1".to_string(), "2".to_string()]]);
    }

    #[test]
    fn ragged_row_reports_line() {
        match parse("a,b\n1\n") {
            Err(IngestError::RaggedRow {
                line,
                expected,
                found,
                ..
            }) => {
                assert_eq!((line, expected, found), (2, 2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_and_blank_input() {
        assert!(matches!(parse(""), Err(IngestError::EmptyInput { .. })));
        assert!(matches!(parse("\n\n"), Err(IngestError::EmptyInput { .. })));
    }

    #[test]
    fn duplicate_header_after_trim() {
        assert!(matches!(
            parse("a, a\n1,2\n"),
            Err(IngestError::DuplicateHeader { name, .. }) if name == "a"
        ));
    }

    #[test]
    fn trailing_blank_lines_ignored() {
        let t = parse("a,b\n1,2\n\n\n").unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn quoted_cells_and_crlf() {
        let t = parse("name,v\r\n\"Bonaire, Sint Eustatius\",\"1\"\r\n").unwrap();
        assert_eq!(t.rows()[0][0], "Bonaire, Sint Eustatius");
        assert_eq!(
            t.to_delimited(Dialect::default()),
            "name,v\n\"Bonaire, Sint Eustatius\",1\n"
        );
    }

    #[test]
    fn tab_dialect() {
        let t = parse_delimited("a\tb\nx,y\tz\n".as_bytes(), Dialect::tab(), "mem").unwrap();
        assert_eq!(t.rows()[0], ["x,y", "z"]);
    }

    #[test]
    fn line_numbers_skip_blank_lines() {
        let t = parse("a\n1\n\n2\n").unwrap();
        assert_eq!((t.line_of(0), t.line_of(1)), (2, 4));
    }

    #[test]
    fn bom_is_stripped() {
        let t = parse("\u{feff}a,b\n1,2\n").unwrap();
        assert_eq!(t.header()[0], "a");
    }
}
