//! A single-process simulator of basic fast probabilistic consensus (FPC)
//! with honest nodes.
//!
//! Each round every node greedy-samples `k` distinct nodes and forms the
//! mean opinion `eta` of the sample. In round 1 it adopts opinion 1 iff
//! `eta >= theta`. In later rounds all nodes share one threshold
//! `U_t ~ Unif[beta, 1 - beta]`: `eta > U_t` gives 1, `eta < U_t` gives 0,
//! and a tie keeps the current opinion. Rounds are synchronous: every node
//! reads the opinions of the previous round.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{GreedySample, RngStream, Sampler};
use crate::weights::{sampling_distribution, WeightDistribution, WeightFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpcConfig {
    pub k: usize,
    /// First-round threshold.
    pub theta: f64,
    pub beta: f64,
    pub max_rounds: usize,
    /// Consecutive unchanged unanimous rounds that count as consensus.
    pub finality_l: usize,
    /// Sampling weight function.
    pub scheme_f: WeightFunction,
    /// Opinion weight function.
    pub scheme_g: WeightFunction,
}

impl Default for FpcConfig {
    fn default() -> Self {
        Self {
            k: 20,
            theta: 0.5,
            beta: 0.3,
            max_rounds: 100,
            finality_l: 2,
            scheme_f: WeightFunction::Identity,
            scheme_g: WeightFunction::ConstantOne,
        }
    }
}

impl FpcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::invalid(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if !(0.0..=0.5).contains(&self.beta) {
            return Err(Error::invalid(format!("beta must lie in [0, 0.5], got {}", self.beta)));
        }
        if self.finality_l == 0 {
            return Err(Error::invalid("finality_l must be at least 1"));
        }
        if self.max_rounds == 0 {
            return Err(Error::invalid("max_rounds must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpcTrace {
    /// Row `t` holds the opinions after round `t`; row 0 is the input.
    pub opinions_by_round: Vec<Vec<u8>>,
    /// Realized `U_t` for rounds `t >= 2`, in order.
    pub thresholds: Vec<f64>,
    pub consensus_round: Option<usize>,
    /// Share of nodes holding the more common opinion after the last round.
    pub final_agreement: f64,
}

impl FpcTrace {
    /// Number of rounds played, not counting the initial state.
    pub fn rounds(&self) -> usize {
        self.opinions_by_round.len() - 1
    }

    /// `U_t` of round `t`; rounds 0 and 1 have none.
    pub fn threshold(&self, round: usize) -> Option<f64> {
        round.checked_sub(2).and_then(|j| self.thresholds.get(j)).copied()
    }

    pub fn ones_fraction(&self, round: usize) -> f64 {
        ones_fraction(&self.opinions_by_round[round])
    }

    /// Opinions after the last round.
    pub fn final_opinions(&self) -> &[u8] {
        self.opinions_by_round.last().expect("trace holds the initial state")
    }
}

fn ones_fraction(opinions: &[u8]) -> f64 {
    opinions.iter().filter(|&&s| s == 1).count() as f64 / opinions.len() as f64
}

/// Mean opinion of a sample, each sampled node weighted by `g(m_j)` times
/// its multiplicity in the sample.
pub fn mean_opinion(
    sample: &GreedySample,
    opinions: &[u8],
    g: WeightFunction,
    weights: &WeightDistribution,
) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&node, &count) in sample.counts() {
        let m = weights
            .get(node)
            .ok_or_else(|| Error::invalid(format!("sampled node {} has no weight", node + 1)))?;
        let s = *opinions
            .get(node)
            .ok_or_else(|| Error::invalid(format!("sampled node {} has no opinion", node + 1)))?;
        let share = g.apply(m) * count as f64;
        den += share;
        if s == 1 {
            num += share;
        }
    }
    if !(den > 0.0) {
        return Err(Error::DegenerateSample(format!(
            "g = {g} vanishes on every sampled node"
        )));
    }
    Ok(num / den)
}

fn node_stream(seed: u64, round: usize, node: usize) -> RngStream {
    RngStream::new(seed, ((round as u64) << 32) | (node as u64 + 1))
}

/// Plays FPC rounds until consensus or `max_rounds`.
pub fn run_fpc(
    config: &FpcConfig,
    weights: &WeightDistribution,
    initial_opinions: &[u8],
    seed: u64,
) -> Result<FpcTrace> {
    config.validate()?;
    if initial_opinions.len() != weights.len() {
        return Err(Error::invalid(format!(
            "{} opinions for {} nodes",
            initial_opinions.len(),
            weights.len()
        )));
    }
    if let Some(j) = initial_opinions.iter().position(|&s| s > 1) {
        return Err(Error::invalid(format!(
            "opinion of node {} is {}, expected 0 or 1",
            j + 1,
            initial_opinions[j]
        )));
    }
    if weights.len() as u64 >= u32::MAX as u64 {
        return Err(Error::invalid("too many nodes"));
    }
    let p = sampling_distribution(weights, config.scheme_f)?;
    let sampler = Sampler::new(&p)?;
    if config.k > sampler.support_size() {
        return Err(Error::invalid(format!(
            "k = {} exceeds the {} nodes that can be sampled",
            config.k,
            sampler.support_size()
        )));
    }

    let mut history = vec![initial_opinions.to_vec()];
    let mut thresholds = Vec::new();
    let mut stable = 0;
    let mut consensus_round = None;
    for round in 1..=config.max_rounds {
        let threshold = if round == 1 {
            config.theta
        } else {
            let u: f64 = RngStream::new(seed, (round as u64) << 32).rng().random();
            let t = config.beta + (1.0 - 2.0 * config.beta) * u;
            thresholds.push(t);
            t
        };
        let previous = history.last().expect("history starts with the input");
        let next = (0..previous.len())
            .into_par_iter()
            .map(|node| {
                let mut rng = node_stream(seed, round, node).rng();
                let sample = sampler.greedy(config.k, &mut rng)?;
                let eta = mean_opinion(&sample, previous, config.scheme_g, weights)?;
                Ok(if round == 1 {
                    u8::from(eta >= threshold)
                } else if eta > threshold {
                    1
                } else if eta < threshold {
                    0
                } else {
                    previous[node]
                })
            })
            .collect::<Result<Vec<u8>>>()?;
        let unanimous = next.iter().all(|&s| s == next[0]);
        stable = if unanimous && &next == previous { stable + 1 } else { 0 };
        history.push(next);
        if stable == config.finality_l {
            consensus_round = Some(round);
            break;
        }
    }
    let ones = ones_fraction(history.last().expect("non-empty"));
    Ok(FpcTrace {
        opinions_by_round: history,
        thresholds,
        consensus_round,
        final_agreement: ones.max(1.0 - ones),
    })
}
