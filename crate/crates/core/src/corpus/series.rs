use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{AnomalyRecord, CorpusError};

/// A labeled year-indexed series; a `None` point is a known-missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualSeries {
    label: String,
    points: BTreeMap<i32, Option<f64>>,
}

impl AnnualSeries {
    pub fn new(label: impl Into<String>, points: BTreeMap<i32, Option<f64>>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }

    pub fn from_points<I>(label: impl Into<String>, points: I) -> Self
    where
        I: IntoIterator<Item = (i32, f64)>,
    {
        Self::new(
            label,
            points.into_iter().map(|(y, v)| (y, Some(v))).collect(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn points(&self) -> &BTreeMap<i32, Option<f64>> {
        &self.points
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        self.points.get(&year).copied().flatten()
    }

    /// Years carrying a non-null value.
    pub fn present_years(&self) -> BTreeSet<i32> {
        self.points
            .iter()
            .filter(|(_, v)| v.is_some())
            .map(|(y, _)| *y)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Mean anomaly per calendar year over the observations present that year.
pub fn annualize_anomaly(records: &[AnomalyRecord]) -> AnnualSeries {
    let mut acc: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for r in records {
        if let Some(a) = r.anomaly {
            let e = acc.entry(r.year).or_insert((0.0, 0));
            e.0 += a;
            e.1 += 1;
        }
    }
    AnnualSeries::new(
        "anomaly",
        acc.into_iter()
            .map(|(y, (sum, n))| (y, Some(sum / n as f64)))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JoinPolicy {
    /// Keep only years where every series has a value.
    #[default]
    Inner,
    /// Keep every year where at least one series has a value; gaps are null.
    /// Used when each pair of columns is completed separately downstream.
    Outer,
}

/// Series aligned on a shared ascending year axis.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedTable {
    years: Vec<i32>,
    columns: Vec<AnnualSeries>,
}

impl JoinedTable {
    /// Builds a table from explicit columns over `years`. Columns may hold
    /// nulls; [`integrate_on_year`] never produces them.
    pub fn from_columns(
        years: Vec<i32>,
        columns: Vec<(String, Vec<Option<f64>>)>,
    ) -> Result<Self, CorpusError> {
        if years.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CorpusError::Invalid(
                "years must be strictly increasing".into(),
            ));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(columns.len());
        for (label, values) in columns {
            if !seen.insert(label.clone()) {
                return Err(CorpusError::DuplicateLabel(label));
            }
            if values.len() != years.len() {
                return Err(CorpusError::Invalid(format!(
                    "column `{label}` has {} values for {} years",
                    values.len(),
                    years.len()
                )));
            }
            out.push(AnnualSeries::new(
                label,
                years.iter().copied().zip(values).collect(),
            ));
        }
        Ok(Self {
            years,
            columns: out,
        })
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn columns(&self) -> &[AnnualSeries] {
        &self.columns
    }

    pub fn labels(&self) -> Vec<&str> {
        self.columns.iter().map(AnnualSeries::label).collect()
    }

    /// Values of column `i` in year order.
    pub fn values(&self, i: usize) -> Vec<Option<f64>> {
        let col = &self.columns[i];
        self.years.iter().map(|y| col.get(*y)).collect()
    }

    pub fn row_count(&self) -> usize {
        self.years.len()
    }
}

/// Joins series on year.
///
/// With [`JoinPolicy::Inner`] the retained years are the intersection of every
/// series' non-null years; column order follows the input.
pub fn integrate_on_year(
    series: &[AnnualSeries],
    policy: JoinPolicy,
) -> Result<JoinedTable, CorpusError> {
    if series.len() < 2 {
        return Err(CorpusError::TooFewSeries(series.len()));
    }
    let mut seen = HashSet::new();
    for s in series {
        if !seen.insert(s.label()) {
            return Err(CorpusError::DuplicateLabel(s.label().to_string()));
        }
    }
    let mut years = series[0].present_years();
    for s in &series[1..] {
        let other = s.present_years();
        match policy {
            JoinPolicy::Inner => years.retain(|y| other.contains(y)),
            JoinPolicy::Outer => years.extend(other),
        }
    }
    if years.is_empty() {
        return Err(CorpusError::EmptyIntersection(
            series
                .iter()
                .map(|s| s.label().to_string())
                .collect::<Vec<_>>()
                .join(", "),
        ));
    }
    let columns = series
        .iter()
        .map(|s| AnnualSeries::new(s.label(), years.iter().map(|y| (*y, s.get(*y))).collect()))
        .collect();
    Ok(JoinedTable {
        years: years.into_iter().collect(),
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn obs(year: i32, month: u8, a: f64) -> AnomalyRecord {
        AnomalyRecord {
            year,
            month: Some(month),
            anomaly: Some(a),
        }
    }

    #[test]
    fn constant_year() {
        let recs: Vec<_> = (1..=12).map(|m| obs(1990, m, 0.5)).collect();
        assert_eq!(
            annualize_anomaly(&recs).points(),
            &BTreeMap::from([(1990, Some(0.5))])
        );
    }

    #[test]
    fn two_point_mean() {
        let s = annualize_anomaly(&[obs(1990, 1, 0.1), obs(1990, 2, 0.3)]);
        assert!((s.get(1990).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn missing_observations_skipped() {
        let recs = vec![
            obs(1990, 1, 0.4),
            AnomalyRecord {
                year: 1990,
                month: Some(2),
                anomaly: None,
            },
            AnomalyRecord {
                year: 1991,
                month: Some(1),
                anomaly: None,
            },
        ];
        let s = annualize_anomaly(&recs);
        assert_eq!(s.get(1990), Some(0.4));
        assert!(!s.points().contains_key(&1991));
    }

    #[test]
    fn random_months_match_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let vals: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let recs: Vec<_> = vals
                .iter()
                .enumerate()
                .map(|(m, v)| obs(2000, m as u8 + 1, *v))
                .collect();
            // pairwise-summation oracle, independent of the sequential loop
            fn psum(v: &[f64]) -> f64 {
                if v.len() == 1 {
                    v[0]
                } else {
                    psum(&v[..v.len() / 2]) + psum(&v[v.len() / 2..])
                }
            }
            let oracle = psum(&vals) / 12.0;
            let got = annualize_anomaly(&recs).get(2000).unwrap();
            assert!((got - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn single_overlap() {
        let a = AnnualSeries::from_points("a", [(1990, 1.0), (1991, 2.0)]);
        let b = AnnualSeries::from_points("b", [(1991, 10.0), (1992, 20.0)]);
        let t = integrate_on_year(&[a, b], JoinPolicy::Inner).unwrap();
        assert_eq!(t.years(), [1991]);
        assert_eq!(
            (t.values(0), t.values(1)),
            (vec![Some(2.0)], vec![Some(10.0)])
        );
    }

    #[test]
    fn outer_join_keeps_union() {
        let a = AnnualSeries::from_points("a", [(1990, 1.0), (1991, 2.0)]);
        let b = AnnualSeries::from_points("b", [(1991, 10.0), (1992, 20.0)]);
        let t = integrate_on_year(&[a, b], JoinPolicy::Outer).unwrap();
        assert_eq!(t.years(), [1990, 1991, 1992]);
        assert_eq!(t.values(0), vec![Some(1.0), Some(2.0), None]);
        assert_eq!(t.values(1), vec![None, Some(10.0), Some(20.0)]);
    }

    #[test]
    fn full_overlap_and_nulls() {
        let a = AnnualSeries::from_points("a", [(1990, 1.0), (1991, 2.0), (1992, 3.0)]);
        let b = AnnualSeries::from_points("b", [(1990, 1.0), (1991, 2.0), (1992, 3.0)]);
        assert_eq!(
            integrate_on_year(&[a.clone(), b], JoinPolicy::Inner)
                .unwrap()
                .row_count(),
            3
        );
        let c = AnnualSeries::new(
            "c",
            BTreeMap::from([(1990, Some(1.0)), (1991, None), (1992, Some(2.0))]),
        );
        let t = integrate_on_year(&[a, c], JoinPolicy::Inner).unwrap();
        assert_eq!(t.years(), [1990, 1992]);
    }

    #[test]
    fn join_errors() {
        let a = AnnualSeries::from_points("a", [(1990, 1.0)]);
        let b = AnnualSeries::from_points("b", [(1991, 1.0)]);
        assert!(matches!(
            integrate_on_year(&[a.clone(), b], JoinPolicy::Inner),
            Err(CorpusError::EmptyIntersection(_))
        ));
        assert!(matches!(
            integrate_on_year(&[a.clone(), a.clone()], JoinPolicy::Inner),
            Err(CorpusError::DuplicateLabel(_))
        ));
        assert!(matches!(
            integrate_on_year(&[a], JoinPolicy::Inner),
            Err(CorpusError::TooFewSeries(1))
        ));
    }

    fn arb_series(label: &'static str) -> impl Strategy<Value = AnnualSeries> {
        proptest::collection::btree_map(
            1900i32..1960,
            proptest::option::weighted(0.8, -5.0f64..5.0),
            1..40,
        )
        .prop_map(move |m| AnnualSeries::new(label, m))
    }

    proptest! {
        #[test]
        fn retained_years_independent_of_order(a in arb_series("a"), b in arb_series("b"), c in arb_series("c")) {
            let min = a.len().min(b.len()).min(c.len());
            let fwd = integrate_on_year(&[a.clone(), b.clone(), c.clone()], JoinPolicy::Inner);
            let rev = integrate_on_year(&[c, a, b], JoinPolicy::Inner);
            match (fwd, rev) {
                (Ok(f), Ok(r)) => {
                    prop_assert_eq!(f.years(), r.years());
                    prop_assert!(f.row_count() <= min);
                    for i in 0..3 {
                        prop_assert!(f.values(i).iter().all(Option::is_some));
                    }
                }
                (Err(CorpusError::EmptyIntersection(_)), Err(CorpusError::EmptyIntersection(_))) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }
}
