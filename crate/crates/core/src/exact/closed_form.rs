use crate::error::{Error, Result};
use crate::numeric::log_ratio;
use crate::weights::{SamplingDistribution, SplitSpec, WeightFunction};

/// `V_2(node)`, the `k = 2` voting power in closed form.
///
/// With `psi = log_ratio`,
/// `V = p_i + (1 - p_i) p_i psi(p_i) - p_i * sum_u p_u psi(p_u)`, the sum
/// running over `u != i`.
pub fn voting_power_k2(p: &SamplingDistribution, node: usize) -> Result<f64> {
    let probs = p.probs();
    if probs.len() < 2 {
        return Err(Error::invalid("k = 2 needs at least two nodes"));
    }
    let p_i = *probs.get(node).ok_or_else(|| {
        Error::invalid(format!("node {} out of range 1..={}", node + 1, probs.len()))
    })?;
    if let Some(u) = probs.iter().position(|&x| x >= 1.0) {
        return Err(Error::invalid(format!(
            "node {} carries all the probability; a second distinct node never appears",
            u + 1
        )));
    }
    let others = crate::numeric::compensated_sum(
        probs
            .iter()
            .enumerate()
            .filter(|&(u, &x)| u != node && x > 0.0)
            .map(|(_, &x)| x * log_ratio(x)),
    );
    Ok(p_i + (1.0 - p_i) * p_i * log_ratio(p_i) - p_i * others)
}

/// Exact `k = 2` change in aggregate voting power when `split` is applied.
///
/// Only the split node's probability enters:
/// `(1 - p) p [sum_j x_j psi(p x_j) - psi(p)]`.
pub fn split_gain_k2(p: &SamplingDistribution, split: &SplitSpec) -> Result<f64> {
    if p.source() != WeightFunction::Identity {
        return Err(Error::UnsupportedConfiguration(format!(
            "the k = 2 split gain is defined for f = id, got f = {}",
            p.source()
        )));
    }
    let p_i = *p.probs().get(split.node()).ok_or_else(|| {
        Error::invalid(format!(
            "split node {} out of range 1..={}",
            split.node() + 1,
            p.len()
        ))
    })?;
    if !(p_i > 0.0 && p_i < 1.0) {
        return Err(Error::invalid(format!(
            "split node must have probability in (0, 1), got {p_i}"
        )));
    }
    if split.r() == 1 {
        return Ok(0.0);
    }
    let parts = crate::numeric::compensated_sum(
        split.fractions().iter().map(|&x| x * log_ratio(p_i * x)),
    );
    Ok((1.0 - p_i) * p_i * (parts - log_ratio(p_i)))
}

fn check_open_unit(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("p must lie in (0, 1), got {p}")))
    }
}

/// `tau_r(p)`: the `k = 2` gain of an equal `r`-split of a node with
/// probability `p`.
pub fn tau_r_value(p: f64, r: usize) -> Result<f64> {
    check_open_unit(p)?;
    if r == 0 {
        return Err(Error::invalid("r must be at least 1"));
    }
    if r == 1 {
        return Ok(0.0);
    }
    Ok((1.0 - p) * p * (log_ratio(p / r as f64) - log_ratio(p)))
}

/// `tau(p)`, the limit of `tau_r(p)` as `r` grows.
pub fn tau_limit(p: f64) -> Result<f64> {
    check_open_unit(p)?;
    Ok(tau_unchecked(p))
}

fn tau_unchecked(p: f64) -> f64 {
    (1.0 - p) * p * (-0.5 - log_ratio(p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauMaximum {
    pub m_star: f64,
    pub tau_star: f64,
}

/// Maximizer of `tau` on `(0.01, 0.99)` by golden-section search.
pub fn tau_argmax() -> TauMaximum {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.01, 0.99);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (tau_unchecked(c), tau_unchecked(d));
    while b - a > 1e-8 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = tau_unchecked(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = tau_unchecked(d);
        }
    }
    let m_star = 0.5 * (a + b);
    TauMaximum {
        m_star,
        tau_star: tau_unchecked(m_star),
    }
}
