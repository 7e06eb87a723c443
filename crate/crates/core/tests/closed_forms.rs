use greedy_voting::exact::{
    split_gain_k2, tau_argmax, tau_limit, tau_r_value, voting_power_k2, voting_power_truncated,
};
use greedy_voting::weights::{
    apply_split, sampling_distribution, SamplingDistribution, SplitSpec, WeightDistribution,
    WeightFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

#[test]
fn powers_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let p = SamplingDistribution::from_probs(random_probs(&mut rng, 6)).unwrap();
        let total: f64 = (0..6).map(|i| voting_power_k2(&p, i).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn closed_form_matches_truncated_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = vec![vec![0.75, 0.25]];
    cases.extend((0..5).map(|_| random_probs(&mut rng, 5)));
    for probs in cases {
        let p = SamplingDistribution::from_probs(probs).unwrap();
        for i in 0..p.len() {
            let t = voting_power_truncated(&p, 2, i, 1e-8).unwrap();
            let closed = voting_power_k2(&p, i).unwrap();
            assert!((t.value - closed).abs() < 1e-6, "{} vs {closed}", t.value);
        }
    }
}

#[test]
fn example_power_with_tolerance() {
    let p = SamplingDistribution::from_probs(vec![0.75, 0.25]).unwrap();
    let eps = 1e-6;
    let t = voting_power_truncated(&p, 2, 0, eps).unwrap();
    assert!((t.value - voting_power_k2(&p, 0).unwrap()).abs() <= 1e-6 + eps);
}

#[test]
fn split_gain_is_difference_of_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let w = WeightDistribution::from_raw(random_probs(&mut rng, 5)).unwrap();
        let node = rng.random_range(0..5);
        let r = rng.random_range(1..5);
        let raw: Vec<f64> = (0..r).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let split = SplitSpec::new(node, raw.iter().map(|x| x / s).collect()).unwrap();
        let p = sampling_distribution(&w, WeightFunction::Identity).unwrap();
        let (after, map) = apply_split(&w, &split).unwrap();
        let q = sampling_distribution(&after, WeightFunction::Identity).unwrap();
        let post: f64 = map.parts().map(|j| voting_power_k2(&q, j).unwrap()).sum();
        let direct = post - voting_power_k2(&p, node).unwrap();
        assert!((split_gain_k2(&p, &split).unwrap() - direct).abs() < 1e-9);
    }
}

#[test]
fn tau_r_is_the_two_node_gain() {
    for j in 1..=9 {
        let p_i = j as f64 / 10.0;
        let p = SamplingDistribution::from_probs(vec![p_i, 1.0 - p_i]).unwrap();
        for r in 2..=20 {
            let gain = split_gain_k2(&p, &SplitSpec::equal(0, r).unwrap()).unwrap();
            assert!((gain - tau_r_value(p_i, r).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn tau_monotone_and_bounded() {
    for j in 1..=9 {
        let p = j as f64 / 10.0;
        let limit = tau_limit(p).unwrap();
        for r in 1..=100 {
            let (a, b) = (tau_r_value(p, r).unwrap(), tau_r_value(p, r + 1).unwrap());
            assert!(b > a);
            assert!(b < limit);
        }
    }
}

#[test]
fn gain_positive_and_maximal_at_equal_split() {
    for &p_i in &[0.1, 0.5, 0.82] {
        let p = SamplingDistribution::from_probs(vec![p_i, 1.0 - p_i]).unwrap();
        let equal = split_gain_k2(&p, &SplitSpec::equal(0, 2).unwrap()).unwrap();
        assert!(equal > 0.0);
        for a in (1..=19).map(|j| j as f64 * 0.05) {
            let g = split_gain_k2(&p, &SplitSpec::new(0, vec![a, 1.0 - a]).unwrap()).unwrap();
            assert!(g > 0.0);
            assert!(equal >= g);
        }
    }
}

#[test]
fn tau_maximum_near_point() {
    let t = tau_argmax();
    assert!((0.8146..=0.8166).contains(&t.m_star));
    assert!((0.1216..=0.1236).contains(&t.tau_star));
    assert!(tau_limit(t.m_star - 0.01).unwrap() < t.tau_star);
    assert!(tau_limit(t.m_star + 0.01).unwrap() < t.tau_star);
}

#[test]
fn split_gain_requires_identity() {
    let w = WeightDistribution::from_raw(vec![0.6, 0.4]).unwrap();
    let p = sampling_distribution(&w, WeightFunction::ConstantOne).unwrap();
    assert!(split_gain_k2(&p, &SplitSpec::equal(0, 2).unwrap()).is_err());
}
