mod common;

use common::{chi2_critical_1pct, chi2_gof, chi2_two_sample, histogram};
use greedy_voting::exact::{exact_joint_distribution, exact_v_distribution};
use greedy_voting::sampler::{draw_one, CoupledSampler, RngStream, Sampler};
use greedy_voting::weights::{
    apply_split, sampling_distribution, SamplingDistribution, SplitSpec, WeightDistribution,
    WeightFunction,
};

fn dist(p: &[f64]) -> SamplingDistribution {
    SamplingDistribution::from_probs(p.to_vec()).unwrap()
}

#[test]
fn point_mass_draw() {
    let p = dist(&[1.0]);
    assert!((0..100).all(|id| draw_one(&p, RngStream::new(4, id)).unwrap() == 0));
}

#[test]
fn fair_coin_frequency() {
    let sampler = Sampler::new(&dist(&[0.5, 0.5])).unwrap();
    let mut rng = RngStream::new(12, 0).rng();
    let n = 1_000_000;
    let ones = (0..n).filter(|_| sampler.draw_one(&mut rng) == 0).count();
    let freq = ones as f64 / n as f64;
    assert!((0.497..=0.503).contains(&freq), "{freq}");
}

#[test]
fn fair_coin_mean_waiting_time() {
    let sampler = Sampler::new(&dist(&[0.5, 0.5])).unwrap();
    let mut rng = RngStream::new(13, 0).rng();
    let n = 1_000_000;
    let total: u64 = (0..n).map(|_| sampler.greedy(2, &mut rng).unwrap().total_draws()).sum();
    let mean = total as f64 / n as f64;
    assert!((mean - 3.0).abs() < 0.01, "{mean}");
}

#[test]
fn v2_law_for_skewed_pair() {
    let p = dist(&[0.9, 0.1]);
    let exact = exact_v_distribution(&p, 2, 300).unwrap();
    let sampler = Sampler::new(&p).unwrap();
    let mut rng = RngStream::new(21, 0).rng();
    let n = 100_000u64;
    let len = 301;
    let counts = histogram((0..n).map(|_| sampler.greedy(2, &mut rng).unwrap().total_draws() as usize), len);
    let expected: Vec<f64> = (0..len).map(|v| exact.prob(v)).collect();
    let (stat, df) = chi2_gof(&expected, &counts, n);
    assert!(stat < chi2_critical_1pct(df), "chi2 = {stat} on {df} df");
}

#[test]
fn joint_law_four_nodes() {
    let p = dist(&[0.4, 0.3, 0.2, 0.1]);
    let (k, node, v_max) = (3, 1, 60);
    let exact = exact_joint_distribution(&p, k, node, v_max).unwrap();
    let cells: Vec<(usize, usize)> = exact.iter().map(|(ell, v, _)| (ell, v)).collect();
    let expected: Vec<f64> = exact.iter().map(|(_, _, q)| q).collect();
    let sampler = Sampler::new(&p).unwrap();
    let mut rng = RngStream::new(31, 0).rng();
    let n = 100_000u64;
    let mut observed = vec![0u64; cells.len()];
    for _ in 0..n {
        let s = sampler.greedy(k, &mut rng).unwrap();
        let key = (s.count(node) as usize, s.total_draws() as usize);
        if let Some(j) = cells.iter().position(|&c| c == key) {
            observed[j] += 1;
        }
    }
    let (stat, df) = chi2_gof(&expected, &observed, n);
    assert!(stat < chi2_critical_1pct(df), "chi2 = {stat} on {df} df");
}

#[test]
fn coupled_marginals_match_plain_sampling() {
    let w = WeightDistribution::from_raw(vec![0.45, 0.25, 0.15, 0.1, 0.05]).unwrap();
    let split = SplitSpec::new(0, vec![0.3, 0.7]).unwrap();
    let k = 3;
    let p = sampling_distribution(&w, WeightFunction::Identity).unwrap();
    let (after, _) = apply_split(&w, &split).unwrap();
    let q = sampling_distribution(&after, WeightFunction::Identity).unwrap();
    let coupled = CoupledSampler::new(&p, &split).unwrap();
    let plain_pre = Sampler::new(&p).unwrap();
    let plain_post = Sampler::new(&q).unwrap();

    let n = 100_000;
    let len = 80;
    let mut rng = RngStream::new(41, 0).rng();
    let pairs: Vec<_> = (0..n).map(|_| coupled.sample(k, &mut rng).unwrap()).collect();
    let pre = histogram(pairs.iter().map(|c| c.pre.total_draws() as usize), len);
    let post = histogram(pairs.iter().map(|c| c.post.total_draws() as usize), len);
    let mut rng_a = RngStream::new(41, 1).rng();
    let mut rng_b = RngStream::new(41, 2).rng();
    let ref_pre = histogram((0..n).map(|_| plain_pre.greedy(k, &mut rng_a).unwrap().total_draws() as usize), len);
    let ref_post = histogram((0..n).map(|_| plain_post.greedy(k, &mut rng_b).unwrap().total_draws() as usize), len);

    let (stat, df) = chi2_two_sample(&pre, &ref_pre);
    assert!(stat < chi2_critical_1pct(df), "pre: chi2 = {stat} on {df} df");
    let (stat, df) = chi2_two_sample(&post, &ref_post);
    assert!(stat < chi2_critical_1pct(df), "post: chi2 = {stat} on {df} df");
}

#[test]
fn fpc_round_samples_follow_the_sampler_law() {
    // The simulator's per-node draws are plain greedy samples; check v_k of
    // the streams it uses against the exact law.
    let p = dist(&[0.25; 4]);
    let exact = exact_v_distribution(&p, 3, 60).unwrap();
    let sampler = Sampler::new(&p).unwrap();
    let n = 50_000u64;
    let counts = histogram(
        (0..n).map(|node| {
            let mut rng = RngStream::new(5, (2u64 << 32) | (node + 1)).rng();
            sampler.greedy(3, &mut rng).unwrap().total_draws() as usize
        }),
        61,
    );
    let expected: Vec<f64> = (0..61).map(|v| exact.prob(v)).collect();
    let (stat, df) = chi2_gof(&expected, &counts, n);
    assert!(stat < chi2_critical_1pct(df), "chi2 = {stat} on {df} df");
}
