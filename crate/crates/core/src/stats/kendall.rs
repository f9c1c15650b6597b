use std::cmp::Ordering;

use serde::Serialize;

use super::{SeriesPair, StatsError, TauVariant};

/// Classification of all n(n-1)/2 index pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PairCensus {
    pub concordant: u64,
    pub discordant: u64,
    /// Tied in x only.
    pub ties_x: u64,
    /// Tied in y only.
    pub ties_y: u64,
    pub ties_both: u64,
}

impl PairCensus {
    pub fn total(&self) -> u64 {
        self.concordant + self.discordant + self.ties_x + self.ties_y + self.ties_both
    }
}

fn cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

fn pairs(t: u64) -> u64 {
    t * t.saturating_sub(1) / 2
}

/// Sum of t(t-1)/2 over runs of equal adjacent elements.
fn tied_pairs<T>(v: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in v.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += pairs(run);
            run = 1;
        }
    }
    total + pairs(run)
}

/// Stable merge sort by value; returns the number of strict inversions.
fn sort_counting_inversions(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_counting_inversions(&mut v[..mid], buf);
    swaps += sort_counting_inversions(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if cmp(v[j], v[i]) == Ordering::Less {
            // v[j] jumps ahead of every remaining left element
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Pair census in O(n log n) (Knight's algorithm).
pub fn pair_census(p: &SeriesPair) -> PairCensus {
    let n = p.len() as u64;
    let mut idx: Vec<(f64, f64)> = p.x().iter().copied().zip(p.y().iter().copied()).collect();
    idx.sort_by(|a, b| cmp(a.0, b.0).then(cmp(a.1, b.1)));

    let tx = tied_pairs(&idx, |a, b| a.0 == b.0);
    let txy = tied_pairs(&idx, |a, b| a.0 == b.0 && a.1 == b.1);

    // Within an x-group ys are already ascending, so inversions in y are
    // exactly the pairs ordered one way by x and the other way by y.
    let mut ys: Vec<f64> = idx.iter().map(|t| t.1).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let discordant = sort_counting_inversions(&mut ys, &mut buf);
    let ty = tied_pairs(&ys, |a, b| a == b);

    let n0 = pairs(n);
    PairCensus {
        concordant: n0 + txy - tx - ty - discordant,
        discordant,
        ties_x: tx - txy,
        ties_y: ty - txy,
        ties_both: txy,
    }
}

/// Kendall's tau.
///
/// Both variants report `ZeroVariance` when either series is entirely tied,
/// since no pair is then ordered by that series.
pub fn kendall(p: &SeriesPair, variant: TauVariant) -> Result<f64, StatsError> {
    let c = pair_census(p);
    let n0 = pairs(p.len() as u64);
    let untied_x = n0 - c.ties_x - c.ties_both;
    let untied_y = n0 - c.ties_y - c.ties_both;
    if untied_x == 0 || untied_y == 0 {
        return Err(StatsError::ZeroVariance);
    }
    let s = c.concordant as f64 - c.discordant as f64;
    let tau = match variant {
        TauVariant::A => s / n0 as f64,
        TauVariant::B => s / ((untied_x as f64) * (untied_y as f64)).sqrt(),
    };
    Ok(super::clamp_unit(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(x: &[f64], y: &[f64]) -> SeriesPair {
        SeriesPair::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn brute(x: &[f64], y: &[f64]) -> PairCensus {
        let mut c = PairCensus::default();
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let dx = x[i] - x[j];
                let dy = y[i] - y[j];
                match (dx == 0.0, dy == 0.0) {
                    (true, true) => c.ties_both += 1,
                    (true, false) => c.ties_x += 1,
                    (false, true) => c.ties_y += 1,
                    _ if (dx > 0.0) == (dy > 0.0) => c.concordant += 1,
                    _ => c.discordant += 1,
                }
            }
        }
        c
    }

    #[test]
    fn hand_example() {
        let p = pair(&[1., 2., 3.], &[3., 1., 2.]);
        let c = pair_census(&p);
        assert_eq!((c.concordant, c.discordant), (1, 2));
        assert_eq!(kendall(&p, TauVariant::A).unwrap(), -1.0 / 3.0);
    }

    #[test]
    fn perfect_agreement_and_disagreement() {
        let p = pair(&[1., 2., 3., 4.], &[10., 20., 30., 40.]);
        assert_eq!(kendall(&p, TauVariant::A).unwrap(), 1.0);
        let p = pair(&[1., 2., 3., 4.], &[40., 30., 20., 10.]);
        assert_eq!(kendall(&p, TauVariant::A).unwrap(), -1.0);
        assert_eq!(kendall(&p, TauVariant::B).unwrap(), -1.0);
    }

    #[test]
    fn tau_b_corrects_ties() {
        // x ties one pair: n0 = 3, Tx = 1, Ty = 0, S = 2
        let p = pair(&[1., 1., 2.], &[1., 2., 3.]);
        assert_eq!(kendall(&p, TauVariant::A).unwrap(), 2.0 / 3.0);
        assert_eq!(kendall(&p, TauVariant::B).unwrap(), 2.0 / 6.0f64.sqrt());
    }

    #[test]
    fn fully_tied_is_undefined() {
        let p = pair(&[5., 5., 5.], &[1., 2., 3.]);
        assert_eq!(kendall(&p, TauVariant::B), Err(StatsError::ZeroVariance));
        assert_eq!(kendall(&p, TauVariant::A), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn census_matches_enumeration_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let n = rng.gen_range(2..60);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64).collect();
            let c = pair_census(&pair(&x, &y));
            assert_eq!(c, brute(&x, &y));
            assert_eq!(c.total(), (n * (n - 1) / 2) as u64);
        }
    }

    #[test]
    fn signed_zero_ties() {
        let c = pair_census(&pair(&[0.0, -0.0, 1.0], &[1.0, 2.0, 3.0]));
        assert_eq!((c.ties_x, c.concordant), (1, 2));
    }
}
