//! Exact laws of greedy sampling and the closed forms available for `k = 2`.
//!
//! The distributions of the total draw count `v_k`, of the pair
//! `(A_k(i), v_k)` and of the distinct count `u_k` after `k` plain draws are
//! all finite sums over
//!
//! * the node drawn last,
//! * the set of nodes drawn before it, and
//! * a composition of the remaining draws among that set,
//!
//! weighted by multinomial coefficients. The sums are evaluated literally,
//! so the work grows combinatorially; [`v_max_limit`] and the support and `k`
//! guards keep every call below roughly `10^8` terms. Larger instances
//! belong to the Monte Carlo estimators in [`crate::fairness`].

mod closed_form;
mod compositions;
mod oracle;

pub use closed_form::{
    split_gain_k2, tau_argmax, tau_limit, tau_r_value, voting_power_k2, TauMaximum,
};
pub use oracle::{enumeration_oracle, OracleResult, ORACLE_MAX_NODES, ORACLE_MAX_V};

use compositions::{CompositionTable, Support};

use crate::error::{Dimension, Error, Result};
use crate::numeric::{binomial, compensated_sum};
use crate::weights::SamplingDistribution;

/// Largest support size accepted by the exact computations.
pub const MAX_SUPPORT: usize = 14;
/// Largest `k` accepted for `v_k` and `(A_k(i), v_k)`.
pub const MAX_K: usize = 6;
/// Largest `k` accepted for `u_k`.
pub const MAX_K_U: usize = 10;

const TERM_BUDGET: f64 = 1e8;
const V_MAX_FLOOR: usize = 24;
const V_MAX_CEIL: usize = 512;

/// Largest `v_max` allowed for a given `k`.
///
/// A full evaluation touches about `C(14, k-1) * C(v_max-1, k-1)`
/// (subset, composition) pairs; the limit is the largest `v_max` that keeps
/// this under `10^8`, clamped to `[24, 512]`. That gives 25 for `k = 6` and
/// 512 for `k <= 3`.
pub fn v_max_limit(k: usize) -> usize {
    if k <= 1 {
        return V_MAX_CEIL;
    }
    let subsets = binomial(MAX_SUPPORT, k - 1);
    let mut v = V_MAX_FLOOR;
    while v < V_MAX_CEIL && subsets * binomial(v, k - 1) <= TERM_BUDGET {
        v += 1;
    }
    v
}

/// Truncated law of `v_k` on `k..=v_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct VDistribution {
    k: usize,
    probs: Vec<f64>,
    residual: f64,
}

impl VDistribution {
    pub(crate) fn from_probs(k: usize, probs: Vec<f64>) -> Self {
        let residual = (1.0 - compensated_sum(probs.iter().copied())).max(0.0);
        Self { k, probs, residual }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v_max(&self) -> usize {
        self.k + self.probs.len() - 1
    }

    /// `P(v_k = v)`, zero outside `k..=v_max`.
    pub fn prob(&self, v: usize) -> f64 {
        v.checked_sub(self.k)
            .and_then(|j| self.probs.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    /// `(v, P(v_k = v))` pairs in increasing `v`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(j, &p)| (self.k + j, p))
    }

    /// Mass beyond `v_max`, `1 - sum`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `E[v_k]` over the truncated support.
    pub fn truncated_mean(&self) -> f64 {
        compensated_sum(self.iter().map(|(v, p)| v as f64 * p))
    }
}

/// Truncated joint law of `(A_k(i), v_k)` for one node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    node: usize,
    k: usize,
    /// `rows[v - k][ell]` for `ell` in `0..=v - k + 1`.
    rows: Vec<Vec<f64>>,
    residual: f64,
}

impl JointDistribution {
    pub(crate) fn zeros(node: usize, k: usize, v_max: usize) -> Self {
        let rows = (k..=v_max).map(|v| vec![0.0; v - k + 2]).collect();
        Self {
            node,
            k,
            rows,
            residual: 1.0,
        }
    }

    pub(crate) fn add(&mut self, ell: usize, v: usize, p: f64) {
        self.rows[v - self.k][ell] += p;
    }

    pub(crate) fn finish(mut self) -> Self {
        let total = compensated_sum(self.rows.iter().flatten().copied());
        self.residual = (1.0 - total).max(0.0);
        self
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v_max(&self) -> usize {
        self.k + self.rows.len() - 1
    }

    /// `P(A_k(i) = ell, v_k = v)`, zero outside the computed support.
    pub fn prob(&self, ell: usize, v: usize) -> f64 {
        v.checked_sub(self.k)
            .and_then(|j| self.rows.get(j))
            .and_then(|row| row.get(ell))
            .copied()
            .unwrap_or(0.0)
    }

    /// `(ell, v, probability)` over the support, by increasing `v` then `ell`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(j, row)| {
            row.iter()
                .enumerate()
                .map(move |(ell, &p)| (ell, self.k + j, p))
        })
    }

    /// Marginal law of `v_k`.
    pub fn marginal_v(&self) -> VDistribution {
        let probs = self
            .rows
            .iter()
            .map(|row| compensated_sum(row.iter().copied()))
            .collect();
        VDistribution::from_probs(self.k, probs)
    }

    /// `E[A_k(i) / v_k]` over the truncated support.
    pub fn truncated_share(&self) -> f64 {
        compensated_sum(self.iter().map(|(ell, v, p)| ell as f64 / v as f64 * p))
    }

    /// `E[A_k(i)]` over the truncated support.
    pub fn truncated_mean_count(&self) -> f64 {
        compensated_sum(self.iter().map(|(ell, _, p)| ell as f64 * p))
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// Law of `u_k`, the number of distinct nodes in `k` draws.
#[derive(Debug, Clone, PartialEq)]
pub struct UDistribution {
    probs: Vec<f64>,
}

impl UDistribution {
    /// `P(u_k = u)` for `u` in `1..=k`.
    pub fn prob(&self, u: usize) -> f64 {
        u.checked_sub(1)
            .and_then(|j| self.probs.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(|(j, &p)| (j + 1, p))
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }
}

fn check_guards(support: &Support, k: usize, max_k: usize, v_max: Option<usize>) -> Result<()> {
    if support.len() > MAX_SUPPORT {
        return Err(Error::limit(Dimension::SupportSize, support.len(), MAX_SUPPORT));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > max_k {
        return Err(Error::limit(Dimension::SampleK, k, max_k));
    }
    if k > support.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the support size {}",
            support.len()
        )));
    }
    if let Some(v_max) = v_max {
        if v_max < k {
            return Err(Error::invalid(format!("v_max = {v_max} is below k = {k}")));
        }
        let limit = v_max_limit(k);
        if v_max > limit {
            return Err(Error::limit(Dimension::VMax, v_max, limit));
        }
    }
    Ok(())
}

/// `P(v_k = v)` for `v` in `k..=v_max`.
pub fn exact_v_distribution(
    p: &SamplingDistribution,
    k: usize,
    v_max: usize,
) -> Result<VDistribution> {
    let support = Support::new(p.probs());
    check_guards(&support, k, MAX_K, Some(v_max))?;
    let mut probs = vec![0.0; v_max - k + 1];
    // Last node outside A, the k - 1 earlier nodes are A, filling v - 1 draws.
    let table = CompositionTable::new(k - 1, v_max - 1);
    support.for_each_subset(&table, None, |subset, sums| {
        let last = support.complement_mass(subset, None);
        for (j, slot) in probs.iter_mut().enumerate() {
            *slot += last * sums[k + j - 1];
        }
    });
    Ok(VDistribution::from_probs(k, probs))
}

/// `P(A_k(node) = ell, v_k = v)` for `v` in `k..=v_max`.
///
/// Three cases: the node never appears (`ell = 0`); it appears once and is
/// the node that completes the sample; or it appears `ell >= 1` times
/// before the last node, which is someone else.
pub fn exact_joint_distribution(
    p: &SamplingDistribution,
    k: usize,
    node: usize,
    v_max: usize,
) -> Result<JointDistribution> {
    if node >= p.len() {
        return Err(Error::invalid(format!(
            "node {} out of range 1..={}",
            node + 1,
            p.len()
        )));
    }
    let support = Support::new(p.probs());
    check_guards(&support, k, MAX_K, Some(v_max))?;
    let mut joint = JointDistribution::zeros(node, k, v_max);
    let pos = support.position(node);
    let p_node = p.probs()[node];

    // k - 1 nodes other than `node` fill the first v - 1 draws.
    let table = CompositionTable::new(k - 1, v_max - 1);
    support.for_each_subset(&table, pos, |subset, sums| {
        let others_last = support.complement_mass(subset, pos);
        for v in k..=v_max {
            let s = sums[v - 1];
            if s == 0.0 {
                continue;
            }
            joint.add(0, v, others_last * s);
            if pos.is_some() {
                joint.add(1, v, p_node * s);
            }
        }
    });

    // `node` appears ell times among the first v - 1 draws together with
    // k - 2 other nodes; a further node closes the sample.
    if let (Some(pos), true) = (pos, k >= 2) {
        let table = CompositionTable::new(k - 2, v_max - 2);
        let mut node_powers = vec![1.0; v_max];
        for ell in 1..v_max {
            node_powers[ell] = node_powers[ell - 1] * p_node;
        }
        support.for_each_subset(&table, Some(pos), |subset, sums| {
            let mut excluded = subset.to_vec();
            excluded.push(pos);
            let last = support.complement_mass(&excluded, None);
            if last == 0.0 {
                return;
            }
            for v in k..=v_max {
                for ell in 1..=v - k + 1 {
                    let s = sums[v - 1 - ell];
                    if s == 0.0 {
                        continue;
                    }
                    let term = binomial(v - 1, ell) * node_powers[ell] * s * last;
                    joint.add(ell, v, term);
                }
            }
        });
    }
    Ok(joint.finish())
}

/// `P(u_k = u)` for `u` in `1..=k`.
pub fn exact_u_distribution(p: &SamplingDistribution, k: usize) -> Result<UDistribution> {
    let support = Support::new(p.probs());
    if support.len() > MAX_SUPPORT {
        return Err(Error::limit(Dimension::SupportSize, support.len(), MAX_SUPPORT));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > MAX_K_U {
        return Err(Error::limit(Dimension::SampleK, k, MAX_K_U));
    }
    let mut probs = vec![0.0; k];
    for u in 1..=k.min(support.len()) {
        let table = CompositionTable::new(u, k);
        let mut terms = Vec::new();
        support.for_each_subset(&table, None, |_, sums| terms.push(sums[k]));
        probs[u - 1] = compensated_sum(terms);
    }
    Ok(UDistribution { probs })
}

/// Voting power with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedPower {
    pub value: f64,
    /// Unaccounted mass; bounds the error because `A/v` lies in `[0, 1]`.
    pub error_bound: f64,
    pub v_max: usize,
}

/// `V_k(node) = E[A_k(node) / v_k]` from the exact joint law, doubling
/// `v_max` from `4k` until the residual drops below `epsilon`.
pub fn voting_power_truncated(
    p: &SamplingDistribution,
    k: usize,
    node: usize,
    epsilon: f64,
) -> Result<TruncatedPower> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let limit = v_max_limit(k);
    let mut v_max = (4 * k).min(limit);
    loop {
        let joint = exact_joint_distribution(p, k, node, v_max)?;
        if joint.residual() < epsilon {
            return Ok(TruncatedPower {
                value: joint.truncated_share(),
                error_bound: joint.residual(),
                v_max,
            });
        }
        if v_max >= limit {
            return Err(Error::ResourceLimit {
                dimension: Dimension::VMax,
                value: v_max,
                limit,
                detail: format!(
                    " (residual {:.3e} still above epsilon {epsilon:.3e})",
                    joint.residual()
                ),
            });
        }
        v_max = (2 * v_max).min(limit);
    }
}
