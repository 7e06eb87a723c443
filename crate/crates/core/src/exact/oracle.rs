use super::{JointDistribution, VDistribution};
use crate::error::{Dimension, Error, Result};
use crate::weights::SamplingDistribution;

pub const ORACLE_MAX_NODES: usize = 5;
pub const ORACLE_MAX_V: usize = 10;

/// Brute-force laws from [`enumeration_oracle`].
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub v: VDistribution,
    /// One joint law per node, indexed like the input distribution.
    pub joints: Vec<JointDistribution>,
}

/// Enumerates every draw sequence of length at most `v_max` and keeps the
/// ones whose last element is the `k`-th distinct node.
///
/// Shares nothing with the formula code, so it serves as ground truth for it.
pub fn enumeration_oracle(
    p: &SamplingDistribution,
    k: usize,
    v_max: usize,
) -> Result<OracleResult> {
    let n = p.len();
    if n > ORACLE_MAX_NODES {
        return Err(Error::limit(Dimension::SupportSize, n, ORACLE_MAX_NODES));
    }
    if v_max > ORACLE_MAX_V {
        return Err(Error::limit(Dimension::VMax, v_max, ORACLE_MAX_V));
    }
    if k == 0 || k > p.support_size() {
        return Err(Error::invalid(format!(
            "k = {k} must lie in 1..={}",
            p.support_size()
        )));
    }
    if v_max < k {
        return Err(Error::invalid(format!("v_max = {v_max} is below k = {k}")));
    }
    let mut walk = Walk {
        probs: p.probs(),
        k,
        v_max,
        counts: vec![0; n],
        v_probs: vec![0.0; v_max - k + 1],
        joints: (0..n)
            .map(|i| JointDistribution::zeros(i, k, v_max))
            .collect(),
    };
    walk.extend(0, 0, 1.0);
    Ok(OracleResult {
        v: VDistribution::from_probs(k, walk.v_probs),
        joints: walk.joints.into_iter().map(JointDistribution::finish).collect(),
    })
}

struct Walk<'a> {
    probs: &'a [f64],
    k: usize,
    v_max: usize,
    counts: Vec<usize>,
    v_probs: Vec<f64>,
    joints: Vec<JointDistribution>,
}

impl Walk<'_> {
    fn extend(&mut self, len: usize, distinct: usize, prob: f64) {
        for j in 0..self.probs.len() {
            let pj = self.probs[j];
            if pj == 0.0 {
                continue;
            }
            let fresh = self.counts[j] == 0;
            let seen = distinct + usize::from(fresh);
            self.counts[j] += 1;
            let v = len + 1;
            if fresh && seen == self.k {
                let q = prob * pj;
                self.v_probs[v - self.k] += q;
                for (i, joint) in self.joints.iter_mut().enumerate() {
                    joint.add(self.counts[i], v, q);
                }
            } else if v < self.v_max {
                self.extend(v, seen, prob * pj);
            }
            self.counts[j] -= 1;
        }
    }
}
