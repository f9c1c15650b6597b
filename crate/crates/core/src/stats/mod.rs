//! Correlation estimators and labeled correlation matrices.
//!
//! Missing data is handled by pairwise completion: for each pair of series
//! only the indices where both values are present are used.

mod kendall;
mod matrix;
mod rank;

pub use kendall::{kendall, pair_census, PairCensus};
pub use matrix::{
    correlation_matrix, correlation_matrix_with, Cell, CellFailure, CorrelationMatrix,
};
pub use rank::{has_ties, rank_average_ties, RankVector};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum number of complete pairs for a coefficient to be computed.
pub const MIN_PAIRS: usize = 3;

/// Default significance threshold on |r|.
pub const DEFAULT_SIGNIFICANCE: f64 = 0.8;

/// Clamp window for floating-point overshoot past ±1.
const CLAMP_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("only {0} complete pairs (need at least {MIN_PAIRS})")]
    TooFewPairs(usize),
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("a series has zero variance")]
    ZeroVariance,
}

/// Correlation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pearson,
    Spearman,
    KendallTauA,
    KendallTauB,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Self::Pearson,
        Self::Spearman,
        Self::KendallTauA,
        Self::KendallTauB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pearson => "pearson",
            Self::Spearman => "spearman",
            Self::KendallTauA => "kendall-tau-a",
            Self::KendallTauB => "kendall-tau-b",
        }
    }

    pub fn estimate(self, pair: &SeriesPair) -> Result<f64, StatsError> {
        match self {
            Self::Pearson => pearson(pair),
            Self::Spearman => spearman(pair),
            Self::KendallTauA => kendall(pair, TauVariant::A),
            Self::KendallTauB => kendall(pair, TauVariant::B),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "pearson" => Ok(Self::Pearson),
            "spearman" => Ok(Self::Spearman),
            "kendall" | "kendall-tau-a" | "tau-a" => Ok(Self::KendallTauA),
            "kendall-tau-b" | "tau-b" => Ok(Self::KendallTauB),
            _ => Err(format!("unknown correlation method `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauVariant {
    /// (N_c - N_d) / (n(n-1)/2), no tie correction.
    A,
    /// Tie-corrected denominator.
    B,
}

/// Two equal-length finite samples, n >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SeriesPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, StatsError> {
        if x.len() != y.len() {
            return Err(StatsError::LengthMismatch(x.len(), y.len()));
        }
        if x.len() < 2 {
            return Err(StatsError::TooFewObservations(x.len()));
        }
        if let Some(i) = x
            .iter()
            .zip(&y)
            .position(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(StatsError::NonFinite(i));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

/// Keeps the indices where both values are present, in order.
pub fn pairwise_complete(x: &[Option<f64>], y: &[Option<f64>]) -> Result<SeriesPair, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    if xs.len() < MIN_PAIRS {
        return Err(StatsError::TooFewPairs(xs.len()));
    }
    SeriesPair::new(xs, ys)
}

fn clamp_unit(r: f64) -> f64 {
    debug_assert!(
        r.abs() <= 1.0 + CLAMP_SLACK,
        "coefficient {r} outside [-1, 1]"
    );
    r.clamp(-1.0, 1.0)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson product-moment correlation (two-pass, centred sums).
pub fn pearson(p: &SeriesPair) -> Result<f64, StatsError> {
    let (mx, my) = (mean(&p.x), mean(&p.y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in p.x.iter().zip(&p.y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(clamp_unit(sxy / (sxx * syy).sqrt()))
}

/// Closed-form Spearman coefficient `1 - 6 Σd² / (n(n² - 1))`.
///
/// Only valid when neither series has ties; [`spearman`] picks this path
/// automatically in that case.
pub fn spearman_closed_form(p: &SeriesPair) -> Result<f64, StatsError> {
    let rx = rank_average_ties(&p.x);
    let ry = rank_average_ties(&p.y);
    let d2: f64 = rx
        .ranks()
        .iter()
        .zip(ry.ranks())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let n = p.len() as f64;
    Ok(clamp_unit(1.0 - 6.0 * d2 / (n * (n * n - 1.0))))
}

/// Spearman rank correlation. Without ties this is the closed form; with
/// ties it is Pearson over average ranks.
pub fn spearman(p: &SeriesPair) -> Result<f64, StatsError> {
    if !has_ties(&p.x) && !has_ties(&p.y) {
        return spearman_closed_form(p);
    }
    let rx = rank_average_ties(&p.x).into_ranks();
    let ry = rank_average_ties(&p.y).into_ranks();
    pearson(&SeriesPair { x: rx, y: ry })
}

/// `|r| >= threshold`.
pub fn is_significant(r: f64, threshold: f64) -> bool {
    r.abs() >= threshold
}
