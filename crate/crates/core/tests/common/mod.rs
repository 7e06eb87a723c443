#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Upper 1% point of the chi-square law with `df` degrees of freedom.
pub fn chi2_critical_1pct(df: usize) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(0.99)
}

/// Pearson goodness of fit. `expected` are probabilities of disjoint cells
/// and `observed` their counts out of `n`; cells with expected count below
/// 5 are pooled together with the leftover mass `1 - sum(expected)`.
/// Returns `(statistic, degrees of freedom)`.
pub fn chi2_gof(expected: &[f64], observed: &[u64], n: u64) -> (f64, usize) {
    assert_eq!(expected.len(), observed.len());
    let n_f = n as f64;
    let mut stat = 0.0;
    let mut cells = 0;
    let mut pooled_p = 1.0;
    let mut pooled_obs = n as f64;
    for (&p, &o) in expected.iter().zip(observed) {
        if p * n_f >= 5.0 {
            let e = p * n_f;
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
            pooled_p -= p;
            pooled_obs -= o as f64;
        }
    }
    let pooled_e = pooled_p.max(0.0) * n_f;
    if pooled_e >= 1.0 {
        stat += (pooled_obs - pooled_e).powi(2) / pooled_e;
        cells += 1;
    } else {
        assert!(pooled_obs <= 5.0, "{pooled_obs} observations in a cell expecting {pooled_e}");
    }
    (stat, cells - 1)
}

/// Two-sample chi-square for equal sample sizes over shared cells; cells
/// with fewer than 10 combined counts are pooled.
pub fn chi2_two_sample(a: &[u64], b: &[u64]) -> (f64, usize) {
    assert_eq!(a.iter().sum::<u64>(), b.iter().sum::<u64>());
    let mut stat = 0.0;
    let mut cells = 0;
    let (mut pa, mut pb) = (0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        if x + y >= 10 {
            stat += (x as f64 - y as f64).powi(2) / (x + y) as f64;
            cells += 1;
        } else {
            pa += x;
            pb += y;
        }
    }
    if pa + pb > 0 {
        stat += (pa as f64 - pb as f64).powi(2) / (pa + pb) as f64;
        cells += 1;
    }
    (stat, cells - 1)
}

/// Histogram of values into `0..len`, with larger values in the last cell.
pub fn histogram(values: impl IntoIterator<Item = usize>, len: usize) -> Vec<u64> {
    let mut h = vec![0u64; len];
    for v in values {
        h[v.min(len - 1)] += 1;
    }
    h
}
