use greedy_voting::exact::{split_gain_k2, voting_power_k2};
use greedy_voting::fairness::{
    default_grid, estimate_split_gain, estimate_voting_power, kde_density, silverman_bandwidth,
    sweep_gain, RunConfig, SweepAxis, SweepBase,
};
use greedy_voting::weights::{
    sampling_distribution, zipf_weights, SamplingDistribution, SplitSpec, WeightDistribution,
    WeightFunction, ZipfParams,
};

#[test]
fn voting_power_examples() {
    let uniform = SamplingDistribution::from_probs(vec![0.25; 4]).unwrap();
    let e = estimate_voting_power(&uniform, 2, 0, &RunConfig::new(100_000, 1)).unwrap();
    assert!(e.agrees_with(0.25, 4.0));
    let skew = SamplingDistribution::from_probs(vec![0.75, 0.25]).unwrap();
    let e = estimate_voting_power(&skew, 2, 0, &RunConfig::new(100_000, 2)).unwrap();
    assert!(e.agrees_with(voting_power_k2(&skew, 0).unwrap(), 4.0));
    assert!(e.agrees_with(0.650948, 4.0));
}

#[test]
fn coupled_beats_independent_on_three_seeds() {
    let w = WeightDistribution::from_raw(vec![0.35, 0.25, 0.2, 0.12, 0.08]).unwrap();
    let split = SplitSpec::equal(0, 2).unwrap();
    let exact = split_gain_k2(&sampling_distribution(&w, WeightFunction::Identity).unwrap(), &split).unwrap();
    for seed in [1, 2, 3] {
        let cfg = RunConfig::new(100_000, seed);
        let c = estimate_split_gain(&w, WeightFunction::Identity, 2, &split, true, &cfg).unwrap();
        let i = estimate_split_gain(&w, WeightFunction::Identity, 2, &split, false, &cfg).unwrap();
        assert!(c.agrees_with(exact, 4.0) && i.agrees_with(exact, 4.0));
        assert!(c.std_error <= i.std_error);
    }
}

#[test]
fn multi_split_changes_sign_for_steep_zipf() {
    // A steep law with k = 20: small r lowers the split node's share,
    // large r raises it.
    let base = SweepBase::zipf(2.0, 1000, 20);
    let values = [2.0, 200.0];
    let result = sweep_gain(&base, SweepAxis::SplitR, &values, &RunConfig::new(20_000, 5)).unwrap();
    let small = &result.points[0].estimate;
    let large = &result.points[1].estimate;
    assert!(small.ci_high < 0.0, "{small:?}");
    assert!(large.ci_low > 0.0, "{large:?}");
}

#[test]
fn flatter_networks_concentrate_gains_near_zero() {
    let mass_near_zero = |n: usize| {
        let w = zipf_weights(ZipfParams { s: 0.8, n }).unwrap();
        let split = SplitSpec::equal(0, 2).unwrap();
        let cfg = RunConfig::new(20_000, 6).retain_samples(true);
        let e = estimate_split_gain(&w, WeightFunction::Identity, 20, &split, true, &cfg).unwrap();
        let samples = e.retained_samples.unwrap();
        let h = silverman_bandwidth(&samples).unwrap();
        let grid = default_grid(&samples, h, None);
        let d = kde_density(&samples, Some(h), &grid).unwrap();
        d.windows(2)
            .filter(|w| w[0].0.abs() < 0.001 && w[1].0.abs() < 0.001)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum::<f64>()
    };
    assert!(mass_near_zero(10_000) > mass_near_zero(100));
}

#[test]
fn kde_of_gains_integrates_to_one() {
    let w = zipf_weights(ZipfParams { s: 1.1, n: 300 }).unwrap();
    let split = SplitSpec::equal(0, 2).unwrap();
    let cfg = RunConfig::new(10_000, 7).retain_samples(true);
    let e = estimate_split_gain(&w, WeightFunction::Identity, 10, &split, true, &cfg).unwrap();
    let samples = e.retained_samples.unwrap();
    let h = silverman_bandwidth(&samples).unwrap();
    let grid = default_grid(&samples, h, None);
    let d = kde_density(&samples, Some(h), &grid).unwrap();
    let integral: f64 = d.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    assert!((0.995..=1.0 + 1e-9).contains(&integral), "{integral}");
}

#[test]
fn independent_mode_for_non_identity_f() {
    let w = zipf_weights(ZipfParams { s: 1.1, n: 50 }).unwrap();
    let split = SplitSpec::equal(0, 2).unwrap();
    let e = estimate_split_gain(&w, WeightFunction::Power(0.5), 5, &split, false, &RunConfig::new(5_000, 1))
        .unwrap();
    assert!(e.std_error > 0.0 && e.mean.abs() < 1.0);
}
