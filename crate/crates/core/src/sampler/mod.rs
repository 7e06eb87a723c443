//! Greedy sampling: draw with replacement until `k` distinct nodes have
//! been seen. Also the coupled pre/post-split sampler used for
//! variance-reduced split-gain estimates.

mod alias;
mod rng;

use std::collections::BTreeMap;
use std::ops::Range;

use rand::Rng;

pub use alias::AliasTable;
pub use rng::{stream_id, RngStream};

use crate::error::{Error, Result};
use crate::weights::{SamplingDistribution, SplitMap, SplitSpec, WeightFunction};

/// Outcome of one greedy sampling run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedySample {
    counts: BTreeMap<usize, u64>,
    total_draws: u64,
    last: usize,
}

impl GreedySample {
    /// Occurrence count `A_k(node)`.
    pub fn count(&self, node: usize) -> u64 {
        self.counts.get(&node).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    /// Total number of draws `v_k`.
    pub fn total_draws(&self) -> u64 {
        self.total_draws
    }

    /// Number of distinct nodes drawn, which is `k`.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// The node whose first appearance ended the run.
    pub fn last(&self) -> usize {
        self.last
    }

    /// Share `A_k(node) / v_k` of the sample held by `node`.
    pub fn share(&self, node: usize) -> f64 {
        self.count(node) as f64 / self.total_draws as f64
    }

    /// Combined share of a range of nodes.
    pub fn range_share(&self, nodes: Range<usize>) -> f64 {
        let c: u64 = self.counts.range(nodes).map(|(_, c)| c).sum();
        c as f64 / self.total_draws as f64
    }
}

/// Incrementally built greedy sample.
#[derive(Debug, Default)]
struct Tally {
    counts: BTreeMap<usize, u64>,
    draws: u64,
    last: usize,
}

impl Tally {
    fn push(&mut self, node: usize) {
        self.draws += 1;
        let c = self.counts.entry(node).or_insert(0);
        if *c == 0 {
            self.last = node;
        }
        *c += 1;
    }

    fn distinct(&self) -> usize {
        self.counts.len()
    }

    fn finish(self) -> GreedySample {
        GreedySample {
            counts: self.counts,
            total_draws: self.draws,
            last: self.last,
        }
    }
}

/// Draws from a fixed sampling distribution via an alias table.
#[derive(Debug, Clone)]
pub struct Sampler {
    table: AliasTable,
}

impl Sampler {
    pub fn new(p: &SamplingDistribution) -> Result<Self> {
        Ok(Self {
            table: AliasTable::new(p.probs())?,
        })
    }

    pub fn support_size(&self) -> usize {
        self.table.support_size()
    }

    #[inline]
    pub fn draw_one<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.table.sample(rng)
    }

    pub fn greedy<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<GreedySample> {
        check_k(k, self.support_size())?;
        let mut tally = Tally::default();
        while tally.distinct() < k {
            tally.push(self.table.sample(rng));
        }
        Ok(tally.finish())
    }
}

fn check_k(k: usize, support: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > support {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {support} nodes with positive probability; \
             greedy sampling would never terminate"
        )));
    }
    Ok(())
}

/// One draw from `p` on the given stream.
pub fn draw_one(p: &SamplingDistribution, stream: RngStream) -> Result<usize> {
    let sampler = Sampler::new(p)?;
    Ok(sampler.draw_one(&mut stream.rng()))
}

/// One greedy sample from `p` on the given stream.
pub fn greedy_sample(p: &SamplingDistribution, k: usize, stream: RngStream) -> Result<GreedySample> {
    Sampler::new(p)?.greedy(k, &mut stream.rng())
}

/// Paired greedy samples before and after a split, built from one stream of
/// draws from the pre-split distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupledSample {
    /// Sample over the original distribution.
    pub pre: GreedySample,
    /// Sample over the split distribution, in post-split indices.
    pub post: GreedySample,
    /// Extra draws the pre-split sequence needed: `v_pre - v_post`.
    pub extra_draws: u64,
    /// Extra appearances of the split node among those draws.
    pub extra_hits: u64,
    node: usize,
    parts: Range<usize>,
}

impl CoupledSample {
    /// Appearances `Y` of the split node before splitting.
    pub fn pre_hits(&self) -> u64 {
        self.pre.count(self.node)
    }

    /// Appearances of all split parts after splitting.
    pub fn post_hits(&self) -> u64 {
        self.post.counts.range(self.parts.clone()).map(|(_, c)| c).sum()
    }

    /// Per-run gain `Y_post / v_post - Y_pre / v_pre`.
    pub fn gain(&self) -> f64 {
        self.post.range_share(self.parts.clone()) - self.pre.share(self.node)
    }
}

/// Coupled sampler for one split of a node.
///
/// Every draw from `P` goes to both sequences, except that a draw of the
/// split node is replaced in the post-split sequence by one of its parts,
/// chosen with probabilities `x_1..x_r`. That conditional law is exact only
/// for the identity sampling function, which is therefore required.
#[derive(Debug, Clone)]
pub struct CoupledSampler {
    pre: AliasTable,
    parts: AliasTable,
    map: SplitMap,
}

impl CoupledSampler {
    pub fn new(p: &SamplingDistribution, split: &SplitSpec) -> Result<Self> {
        if p.source() != WeightFunction::Identity {
            return Err(Error::UnsupportedConfiguration(format!(
                "coupled sampling needs the identity sampling function, got {}",
                p.source()
            )));
        }
        let node = split.node();
        match p.get(node) {
            None => {
                return Err(Error::invalid(format!(
                    "split node {} out of range",
                    node + 1
                )))
            }
            Some(pi) if pi <= 0.0 => {
                return Err(Error::invalid(format!(
                    "cannot split node {} with zero probability",
                    node + 1
                )))
            }
            Some(_) => {}
        }
        let pre = AliasTable::new(p.probs())?;
        let parts = AliasTable::new(split.fractions())?;
        let map = SplitMap::new(node, split.r(), p.len());
        Ok(Self { pre, parts, map })
    }

    pub fn map(&self) -> SplitMap {
        self.map
    }

    /// Support size before splitting; `k` may not exceed it.
    pub fn support_size(&self) -> usize {
        self.pre.support_size()
    }

    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<CoupledSample> {
        check_k(k, self.support_size())?;
        let node = self.map.node();
        let mut pre = Tally::default();
        let mut post = Tally::default();
        let mut post_done = false;
        while pre.distinct() < k {
            let u = self.pre.sample(rng);
            pre.push(u);
            if !post_done {
                let part = if u == node { self.parts.sample(rng) } else { 0 };
                post.push(self.map.map_draw(u, part));
                post_done = post.distinct() >= k;
            }
        }
        debug_assert!(post_done, "post-split sequence always finishes first");
        let pre = pre.finish();
        let post = post.finish();
        let extra_draws = pre.total_draws - post.total_draws;
        let pre_hits = pre.count(node);
        let post_hits: u64 = post.counts.range(self.map.parts()).map(|(_, c)| c).sum();
        Ok(CoupledSample {
            extra_draws,
            extra_hits: pre_hits - post_hits,
            pre,
            post,
            node,
            parts: self.map.parts(),
        })
    }
}

/// One coupled sample on the given stream.
pub fn coupled_greedy_sample(
    p: &SamplingDistribution,
    split: &SplitSpec,
    k: usize,
    stream: RngStream,
) -> Result<CoupledSample> {
    CoupledSampler::new(p, split)?.sample(k, &mut stream.rng())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{sampling_distribution, WeightDistribution};

    fn dist(p: &[f64]) -> SamplingDistribution {
        SamplingDistribution::from_probs(p.to_vec()).unwrap()
    }

    fn check_greedy_invariants(s: &GreedySample, k: usize) {
        assert_eq!(s.distinct(), k);
        assert_eq!(s.counts().values().sum::<u64>(), s.total_draws());
        assert!(s.total_draws() >= k as u64);
        assert_eq!(s.count(s.last()), 1, "k-th distinct node is drawn once, last");
    }

    #[test]
    fn point_mass_draw() {
        let p = dist(&[1.0]);
        for s in 0..20 {
            assert_eq!(draw_one(&p, RngStream::new(s, 0)).unwrap(), 0);
        }
    }

    #[test]
    fn k_one_takes_one_draw() {
        let p = dist(&[0.2, 0.3, 0.5]);
        for s in 0..100 {
            let g = greedy_sample(&p, 1, RngStream::new(s, 1)).unwrap();
            assert_eq!(g.total_draws(), 1);
            check_greedy_invariants(&g, 1);
        }
    }

    #[test]
    fn greedy_invariants_hold() {
        let p = dist(&[0.6, 0.2, 0.1, 0.05, 0.05]);
        let sampler = Sampler::new(&p).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        for k in 1..=5 {
            for _ in 0..2000 {
                check_greedy_invariants(&sampler.greedy(k, &mut rng).unwrap(), k);
            }
        }
    }

    #[test]
    fn k_beyond_support_is_rejected() {
        let p = dist(&[0.5, 0.5, 0.0]);
        assert!(matches!(
            greedy_sample(&p, 3, RngStream::new(0, 0)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(greedy_sample(&p, 0, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn determinism() {
        let p = dist(&[0.4, 0.3, 0.2, 0.1]);
        let a = greedy_sample(&p, 3, RngStream::new(99, 5)).unwrap();
        let b = greedy_sample(&p, 3, RngStream::new(99, 5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coupled_degenerate_split_is_identical() {
        let p = dist(&[0.5, 0.3, 0.2]);
        let split = SplitSpec::new(0, vec![1.0]).unwrap();
        let cs = CoupledSampler::new(&p, &split).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..2000 {
            let c = cs.sample(2, &mut rng).unwrap();
            assert_eq!(c.extra_draws, 0);
            assert_eq!(c.extra_hits, 0);
            assert_eq!(c.pre, c.post);
            assert_eq!(c.gain(), 0.0);
        }
    }

    #[test]
    fn coupled_split_node_absent_means_no_extra() {
        let p = dist(&[0.2, 0.3, 0.3, 0.2]);
        let split = SplitSpec::equal(0, 3).unwrap();
        let cs = CoupledSampler::new(&p, &split).unwrap();
        let mut rng = RngStream::new(8, 0).rng();
        let mut seen = 0;
        for _ in 0..5000 {
            let c = cs.sample(3, &mut rng).unwrap();
            let node_before_last = c.pre.count(0) > 0 && c.pre.last() != 0;
            if !node_before_last {
                seen += 1;
                assert_eq!((c.extra_draws, c.extra_hits), (0, 0));
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn coupled_post_never_outlasts_pre() {
        let p = dist(&[0.5, 0.5]);
        let split = SplitSpec::equal(0, 2).unwrap();
        let cs = CoupledSampler::new(&p, &split).unwrap();
        let mut rng = RngStream::new(13, 0).rng();
        for _ in 0..100_000 {
            let c = cs.sample(2, &mut rng).unwrap();
            assert!(c.post.total_draws() <= c.pre.total_draws());
            assert_eq!(c.pre.total_draws(), c.post.total_draws() + c.extra_draws);
            assert_eq!(c.pre_hits(), c.post_hits() + c.extra_hits);
            assert!(c.extra_hits <= c.extra_draws);
        }
    }

    #[test]
    fn coupled_requires_identity() {
        let w = WeightDistribution::from_raw(vec![0.5, 0.5]).unwrap();
        let p = sampling_distribution(&w, WeightFunction::ConstantOne).unwrap();
        let split = SplitSpec::equal(0, 2).unwrap();
        assert!(matches!(
            CoupledSampler::new(&p, &split),
            Err(Error::UnsupportedConfiguration(_))
        ));
    }
}
