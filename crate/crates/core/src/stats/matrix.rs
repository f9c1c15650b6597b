use rayon::prelude::*;
use serde::Serialize;

use super::{is_significant, pairwise_complete, Method, SeriesPair, StatsError, MIN_PAIRS};
use crate::corpus::JoinedTable;

/// Why a matrix cell has no coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellFailure {
    TooFewPairs,
    ZeroVariance,
}

impl CellFailure {
    fn from_error(e: &StatsError) -> Self {
        match e {
            StatsError::ZeroVariance => Self::ZeroVariance,
            _ => Self::TooFewPairs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub value: Option<f64>,
    /// Complete pairs used (effective sample size).
    pub n: usize,
    pub failure: Option<CellFailure>,
}

impl Cell {
    fn from_result(n: usize, r: Result<f64, StatsError>) -> Self {
        match r {
            Ok(v) => Self {
                value: Some(v),
                n,
                failure: None,
            },
            Err(e) => Self {
                value: None,
                n,
                failure: Some(CellFailure::from_error(&e)),
            },
        }
    }
}

/// Square, symmetric matrix of coefficients for one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    method: Method,
    labels: Vec<String>,
    /// Row-major, `labels.len()²` cells.
    cells: Vec<Cell>,
}

impl CorrelationMatrix {
    /// Builds a matrix from row-major values, e.g. one read back from a table.
    /// Checks shape, symmetry and range; undefined cells carry no failure
    /// reason and `n = 0`.
    pub fn from_values(
        method: Method,
        labels: Vec<String>,
        values: Vec<Option<f64>>,
    ) -> Result<Self, String> {
        let k = labels.len();
        if values.len() != k * k {
            return Err(format!("{} values for a {k}x{k} matrix", values.len()));
        }
        for i in 0..k {
            for j in 0..k {
                let v = values[i * k + j];
                if v != values[j * k + i] {
                    return Err(format!("cell ({i}, {j}) is not symmetric"));
                }
                if v.is_some_and(|v| !(-1.0..=1.0).contains(&v)) {
                    return Err(format!("cell ({i}, {j}) outside [-1, 1]"));
                }
            }
        }
        let cells = values
            .into_iter()
            .map(|value| Cell {
                value,
                n: 0,
                failure: None,
            })
            .collect();
        Ok(Self {
            method,
            labels,
            cells,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.size() + j]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cell(i, j).value
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn by_label(&self, a: &str, b: &str) -> Option<f64> {
        self.get(self.index_of(a)?, self.index_of(b)?)
    }

    /// Upper-triangle pairs with `|r| >= threshold`, in row-major order.
    pub fn significant_pairs(&self, threshold: f64) -> Vec<(&str, &str, f64)> {
        let mut out = Vec::new();
        for i in 0..self.size() {
            for j in i + 1..self.size() {
                if let Some(r) = self.get(i, j) {
                    if is_significant(r, threshold) {
                        out.push((self.labels[i].as_str(), self.labels[j].as_str(), r));
                    }
                }
            }
        }
        out
    }

    /// Delimited table: labels across the first row and down the first
    /// column, values to 6 decimals, undefined cells blank. LF line endings.
    pub fn to_delimited(&self, delimiter: u8) -> String {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for i in 0..self.size() {
            let mut row = vec![self.labels[i].clone()];
            row.extend((0..self.size()).map(|j| self.get(i, j).map_or(String::new(), format_coef)));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("labels are UTF-8")
    }
}

/// Six decimals; negative zero prints without a sign.
pub(crate) fn format_coef(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Coefficient matrix over every column pair, completed pairwise.
pub fn correlation_matrix(table: &JoinedTable, method: Method) -> CorrelationMatrix {
    correlation_matrix_with(table, method, |p| method.estimate(p))
}

/// As [`correlation_matrix`] with a caller-supplied estimator, which is
/// invoked once per unordered off-diagonal pair that survives completion.
pub fn correlation_matrix_with<F>(
    table: &JoinedTable,
    method: Method,
    estimator: F,
) -> CorrelationMatrix
where
    F: Fn(&SeriesPair) -> Result<f64, StatsError> + Sync,
{
    let labels: Vec<String> = table.labels().iter().map(|s| s.to_string()).collect();
    let k = labels.len();
    let columns: Vec<Vec<Option<f64>>> = (0..k).map(|i| table.values(i)).collect();

    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let off: Vec<Cell> = pairs
        .par_iter()
        .map(
            |&(i, j)| match pairwise_complete(&columns[i], &columns[j]) {
                Ok(p) => Cell::from_result(p.len(), estimator(&p)),
                Err(e) => {
                    let n = columns[i]
                        .iter()
                        .zip(&columns[j])
                        .filter(|(a, b)| a.is_some() && b.is_some())
                        .count();
                    Cell::from_result(n, Err(e))
                }
            },
        )
        .collect();

    let placeholder = Cell::from_result(0, Err(StatsError::TooFewPairs(0)));
    let mut cells = vec![placeholder; k * k];
    for (i, c) in columns.iter().enumerate() {
        cells[i * k + i] = self_cell(c);
    }
    for (&(i, j), cell) in pairs.iter().zip(off) {
        cells[i * k + j] = cell;
        cells[j * k + i] = cell;
    }
    CorrelationMatrix {
        method,
        labels,
        cells,
    }
}

/// A series correlates perfectly with itself when it has enough points and
/// is not constant.
fn self_cell(col: &[Option<f64>]) -> Cell {
    let present: Vec<f64> = col.iter().flatten().copied().collect();
    let n = present.len();
    if n < MIN_PAIRS {
        return Cell::from_result(n, Err(StatsError::TooFewPairs(n)));
    }
    if present.iter().all(|v| *v == present[0]) {
        return Cell::from_result(n, Err(StatsError::ZeroVariance));
    }
    Cell::from_result(n, Ok(1.0))
}
