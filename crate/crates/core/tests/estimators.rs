use disaster_corr::stats::{
    kendall, pair_census, pearson, spearman, spearman_closed_form, SeriesPair, TauVariant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Oracles are written independently of the library code paths.

fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let below = v.iter().filter(|b| *b < a).count() as f64;
            let same = v.iter().filter(|b| *b == a).count() as f64;
            below + (same + 1.0) / 2.0
        })
        .collect()
}

fn oracle_tau_a(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let p = (x[i] - x[j]) * (y[i] - y[j]);
            if p > 0.0 {
                s += 1;
            } else if p < 0.0 {
                s -= 1;
            }
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

/// Random pair with duplicates injected; redrawn until neither side is
/// constant.
fn tied_pair(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    loop {
        let n = rng.gen_range(3..=50);
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
        for _ in 0..rng.gen_range(1..=n) {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            x[i] = x[j];
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            y[i] = y[j];
        }
        let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
        if !constant(&x) && !constant(&y) {
            return (x, y);
        }
    }
}

#[test]
fn estimators_match_oracles_on_tied_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..1000 {
        let (x, y) = tied_pair(&mut rng);
        let p = SeriesPair::new(x.clone(), y.clone()).unwrap();

        let r = pearson(&p).unwrap();
        assert!((r - oracle_pearson(&x, &y)).abs() < 1e-12);

        let rs = spearman(&p).unwrap();
        let expect = oracle_pearson(&oracle_ranks(&x), &oracle_ranks(&y));
        assert!((rs - expect).abs() < 1e-12, "{rs} vs {expect}");

        assert_eq!(kendall(&p, TauVariant::A).unwrap(), oracle_tau_a(&x, &y));
    }
}

#[test]
fn closed_form_spearman_matches_ranked_pearson() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc105ed);
    for _ in 0..1000 {
        let n = rng.gen_range(3..=50);
        // a random permutation pair has no ties by construction
        let mut x: Vec<f64> = (0..n).map(f64::from).collect();
        let mut y = x.clone();
        for v in [&mut x, &mut y] {
            for i in (1..v.len()).rev() {
                v.swap(i, rng.gen_range(0..=i));
            }
        }
        let x: Vec<f64> = x.iter().map(|v| v * 1.7 - 3.0).collect();
        let p = SeriesPair::new(x.clone(), y.clone()).unwrap();
        let closed = spearman_closed_form(&p).unwrap();
        let ranked = oracle_pearson(&oracle_ranks(&x), &oracle_ranks(&y));
        assert!((closed - ranked).abs() < 1e-12);
    }
}

#[test]
fn tau_b_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..300 {
        let (x, y) = tied_pair(&mut rng);
        let n = x.len();
        let (mut s, mut tx, mut ty) = (0i64, 0u64, 0u64);
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
                if dx == 0.0 {
                    tx += 1;
                }
                if dy == 0.0 {
                    ty += 1;
                }
                s += ((dx * dy) > 0.0) as i64 - ((dx * dy) < 0.0) as i64;
            }
        }
        let n0 = (n * (n - 1) / 2) as u64;
        let expect = s as f64 / (((n0 - tx) as f64) * ((n0 - ty) as f64)).sqrt();
        let p = SeriesPair::new(x, y).unwrap();
        let got = kendall(&p, TauVariant::B).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }
}

#[test]
fn census_scales_to_long_series() {
    // O(n log n) path on a series far longer than any annual corpus
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 20_000;
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..1000) as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| v + rng.gen_range(0..50) as f64).collect();
    let c = pair_census(&SeriesPair::new(x, y).unwrap());
    assert_eq!(c.total(), (n as u64) * (n as u64 - 1) / 2);
    assert!(c.concordant > c.discordant);
}
