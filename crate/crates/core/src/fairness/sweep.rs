use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{split_gain_at_point, GainEstimate, RunConfig};
use crate::error::{Error, Result};
use crate::weights::{zipf_weights, SplitSpec, WeightDistribution, WeightFunction, ZipfParams};

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NetworkSize,
    SampleK,
    SplitR,
    ZipfS,
}

impl SweepAxis {
    /// Whether the axis takes integer values.
    pub fn is_integer(self) -> bool {
        !matches!(self, SweepAxis::ZipfS)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::NetworkSize => "network_size",
            SweepAxis::SampleK => "sample_k",
            SweepAxis::SplitR => "split_r",
            SweepAxis::ZipfS => "zipf_s",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "network_size" | "n" => Ok(SweepAxis::NetworkSize),
            "sample_k" | "k" => Ok(SweepAxis::SampleK),
            "split_r" | "r" => Ok(SweepAxis::SplitR),
            "zipf_s" | "s" => Ok(SweepAxis::ZipfS),
            other => Err(Error::invalid(format!(
                "unknown sweep axis {other:?}; expected network_size, sample_k, split_r or zipf_s"
            ))),
        }
    }
}

/// Where the weights of a sweep point come from.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSource {
    Zipf(ZipfParams),
    Explicit(WeightDistribution),
}

/// How the target node is split.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitShape {
    Equal(usize),
    Fractions(Vec<f64>),
}

/// Everything a sweep point needs except the swept value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBase {
    pub weights: WeightSource,
    pub f: WeightFunction,
    pub k: usize,
    /// Split node; `None` picks the heaviest.
    pub node: Option<usize>,
    pub split: SplitShape,
    pub coupled: bool,
}

impl SweepBase {
    /// Heaviest node of a Zipf network, split in two equal halves, coupled.
    pub fn zipf(s: f64, n: usize, k: usize) -> Self {
        Self {
            weights: WeightSource::Zipf(ZipfParams { s, n }),
            f: WeightFunction::Identity,
            k,
            node: None,
            split: SplitShape::Equal(2),
            coupled: true,
        }
    }

    fn at(&self, axis: SweepAxis, value: f64) -> Result<(WeightDistribution, usize, SplitSpec)> {
        let mut source = self.weights.clone();
        let mut k = self.k;
        let mut shape = self.split.clone();
        let as_int = value as usize;
        match (axis, &mut source) {
            (SweepAxis::NetworkSize, WeightSource::Zipf(z)) => z.n = as_int,
            (SweepAxis::ZipfS, WeightSource::Zipf(z)) => z.s = value,
            (SweepAxis::NetworkSize | SweepAxis::ZipfS, WeightSource::Explicit(_)) => {
                return Err(Error::invalid(format!(
                    "axis {axis} needs Zipf-generated weights"
                )))
            }
            (SweepAxis::SampleK, _) => k = as_int,
            (SweepAxis::SplitR, _) => shape = SplitShape::Equal(as_int),
        }
        let w = match source {
            WeightSource::Zipf(z) => zipf_weights(z)?,
            WeightSource::Explicit(w) => w,
        };
        let node = self.node.unwrap_or_else(|| w.heaviest());
        let split = match shape {
            SplitShape::Equal(r) => SplitSpec::equal(node, r)?,
            SplitShape::Fractions(x) => SplitSpec::new(node, x)?,
        };
        Ok((w, k, split))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub estimate: GainEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

fn check_values(axis: SweepAxis, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid("a sweep needs at least one axis value"));
    }
    if values.len() >= 1 << 24 {
        return Err(Error::invalid("too many sweep points"));
    }
    for &v in values {
        if !v.is_finite() {
            return Err(Error::invalid(format!("axis value {v} is not finite")));
        }
        if axis.is_integer() && (v < 1.0 || v.fract() != 0.0) {
            return Err(Error::invalid(format!(
                "axis {axis} takes positive integers, got {v}"
            )));
        }
        if axis == SweepAxis::ZipfS && v < 0.0 {
            return Err(Error::invalid(format!("Zipf exponent must be >= 0, got {v}")));
        }
    }
    if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!(
            "axis values must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Split-gain estimates along one axis. Point `t` draws from its own
/// streams, so every point is reproducible on its own.
pub fn sweep_gain(
    base: &SweepBase,
    axis: SweepAxis,
    values: &[f64],
    config: &RunConfig,
) -> Result<SweepResult> {
    check_values(axis, values)?;
    let points = values
        .iter()
        .enumerate()
        .map(|(t, &value)| {
            let (w, k, split) = base.at(axis, value)?;
            let estimate =
                split_gain_at_point(&w, base.f, k, &split, base.coupled, config, t as u32)?;
            Ok(SweepPoint {
                axis_value: value,
                estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { axis, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::estimate_split_gain;

    #[test]
    fn single_point_equals_direct_estimate() {
        let base = SweepBase::zipf(0.8, 300, 5);
        let cfg = RunConfig::new(5_000, 21);
        let sweep = sweep_gain(&base, SweepAxis::NetworkSize, &[300.0], &cfg).unwrap();
        let w = zipf_weights(ZipfParams { s: 0.8, n: 300 }).unwrap();
        let split = SplitSpec::equal(0, 2).unwrap();
        let direct = estimate_split_gain(&w, WeightFunction::Identity, 5, &split, true, &cfg).unwrap();
        assert_eq!(sweep.points[0].estimate, direct);
    }

    #[test]
    fn value_checks() {
        let base = SweepBase::zipf(0.8, 50, 3);
        let cfg = RunConfig::new(10, 1);
        assert!(sweep_gain(&base, SweepAxis::SampleK, &[3.0, 2.0], &cfg).is_err());
        assert!(sweep_gain(&base, SweepAxis::SplitR, &[2.5], &cfg).is_err());
        assert!(sweep_gain(&base, SweepAxis::SampleK, &[], &cfg).is_err());
        assert!(sweep_gain(&base, SweepAxis::ZipfS, &[0.5, 1.5], &cfg).is_ok());
        let explicit = SweepBase {
            weights: WeightSource::Explicit(WeightDistribution::uniform(4).unwrap()),
            ..base
        };
        assert!(sweep_gain(&explicit, SweepAxis::NetworkSize, &[10.0], &cfg).is_err());
        assert!(sweep_gain(&explicit, SweepAxis::SplitR, &[2.0, 3.0], &cfg).is_ok());
    }

    #[test]
    fn axis_names_round_trip() {
        for a in [SweepAxis::NetworkSize, SweepAxis::SampleK, SweepAxis::SplitR, SweepAxis::ZipfS] {
            assert_eq!(a.to_string().parse::<SweepAxis>().unwrap(), a);
        }
    }

    #[test]
    fn deterministic_across_threads() {
        let base = SweepBase::zipf(1.1, 400, 6);
        let values = [2.0, 3.0, 5.0];
        let a = sweep_gain(&base, SweepAxis::SplitR, &values, &RunConfig::new(8_000, 3).threads(1)).unwrap();
        let b = sweep_gain(&base, SweepAxis::SplitR, &values, &RunConfig::new(8_000, 3).threads(3)).unwrap();
        assert_eq!(a, b);
    }
}
