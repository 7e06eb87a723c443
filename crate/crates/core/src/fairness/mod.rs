//! Monte Carlo voting powers and split gains, parameter sweeps, and the
//! density and QQ summaries of per-run gains.
//!
//! Runs are cut into fixed chunks of [`CHUNK_RUNS`]. Chunk `c` of experiment
//! point `t` draws from stream `stream_id(t, c, lane)`, and chunk summaries
//! are merged in chunk order, so an estimate depends on the seed and nothing
//! else: not on the thread count, not on scheduling.

mod density;
mod engine;
mod sweep;

pub use density::{default_grid, MAX_AUTO_GRID, kde_density, qq_points, silverman_bandwidth};
pub use engine::{RunConfig, CHUNK_RUNS, MAX_RETAINED};
pub use sweep::{sweep_gain, SplitShape, SweepAxis, SweepBase, SweepPoint, SweepResult, WeightSource};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::{CoupledSampler, Sampler};
use crate::weights::{
    apply_split, sampling_distribution, SamplingDistribution, SplitSpec, WeightDistribution,
    WeightFunction,
};

use engine::{monte_carlo, monte_carlo_vector};

/// Sample mean of per-run values with a normal-approximation 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_runs)`.
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_runs: u64,
    /// Per-run values, at most [`MAX_RETAINED`] of them, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retained_samples: Option<Vec<f64>>,
}

impl GainEstimate {
    pub(crate) fn from_moments(n: u64, mean: f64, variance: f64, retained: Option<Vec<f64>>) -> Self {
        let std_error = if n > 1 {
            (variance.max(0.0) / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            ci_low: mean - 1.96 * std_error,
            ci_high: mean + 1.96 * std_error,
            n_runs: n,
            retained_samples: retained,
        }
    }

    /// Whether `value` lies within `z` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, z: f64) -> bool {
        (self.mean - value).abs() <= z * self.std_error
    }
}

/// Estimate of `V_k(node) = E[A_k(node) / v_k]`.
pub fn estimate_voting_power(
    p: &SamplingDistribution,
    k: usize,
    node: usize,
    config: &RunConfig,
) -> Result<GainEstimate> {
    if node >= p.len() {
        return Err(Error::invalid(format!(
            "node {} out of range 1..={}",
            node + 1,
            p.len()
        )));
    }
    let sampler = Sampler::new(p)?;
    monte_carlo(config, 0, |rng, _| Ok(sampler.greedy(k, rng)?.share(node)))
}

/// Estimates of `V_k(i)` for every node, all from the same runs.
pub fn estimate_voting_powers(
    p: &SamplingDistribution,
    k: usize,
    config: &RunConfig,
) -> Result<Vec<GainEstimate>> {
    let sampler = Sampler::new(p)?;
    monte_carlo_vector(config, 0, p.len(), |rng, shares| {
        let s = sampler.greedy(k, rng)?;
        let v = s.total_draws() as f64;
        shares.extend(s.counts().iter().map(|(&i, &c)| (i, c as f64 / v)));
        Ok(())
    })
}

/// Estimate of the change in the split node's aggregate voting power,
/// `E[Y_post / v_post] - E[Y_pre / v_pre]`.
///
/// In coupled mode both samples come from one draw sequence, which needs
/// `f = id`. Otherwise the two samples are independent.
pub fn estimate_split_gain(
    w: &WeightDistribution,
    f: WeightFunction,
    k: usize,
    split: &SplitSpec,
    coupled: bool,
    config: &RunConfig,
) -> Result<GainEstimate> {
    split_gain_at_point(w, f, k, split, coupled, config, 0)
}

pub(crate) fn split_gain_at_point(
    w: &WeightDistribution,
    f: WeightFunction,
    k: usize,
    split: &SplitSpec,
    coupled: bool,
    config: &RunConfig,
    point: u32,
) -> Result<GainEstimate> {
    let (split_w, map) = apply_split(w, split)?;
    let pre = sampling_distribution(w, f)?;
    if coupled {
        if f != WeightFunction::Identity {
            return Err(Error::UnsupportedConfiguration(format!(
                "coupled estimation needs f = id, got f = {f}; run in independent mode instead"
            )));
        }
        let sampler = CoupledSampler::new(&pre, split)?;
        monte_carlo(config, point, |rng, _| Ok(sampler.sample(k, rng)?.gain()))
    } else {
        let post = sampling_distribution(&split_w, f)?;
        let before = Sampler::new(&pre)?;
        let after = Sampler::new(&post)?;
        let node = split.node();
        monte_carlo(config, point, |rng, aux| {
            let b = before.greedy(k, rng)?;
            let a = after.greedy(k, aux)?;
            Ok(a.range_share(map.parts()) - b.share(node))
        })
    }
}
