//! Node weight distributions, the sampling distributions they induce, node
//! splitting and Zipf-law weight generation.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

const SUM_TOLERANCE: f64 = 1e-12;

/// Normalized, non-negative node weights `m_1, ..., m_N`.
///
/// Node `j` of the math is index `j - 1` here. Nodes outside the vector have
/// weight zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDistribution {
    weights: Vec<f64>,
}

impl WeightDistribution {
    /// Normalizes raw non-negative stakes so they sum to one.
    pub fn from_raw(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("weight vector is empty"));
        }
        if let Some((i, w)) = raw
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::invalid(format!(
                "weight of node {} is {w}; weights must be finite and non-negative",
                i + 1
            )));
        }
        let total = compensated_sum(raw.iter().copied());
        if total <= 0.0 {
            return Err(Error::invalid("weights sum to zero"));
        }
        let weights = raw.into_iter().map(|w| w / total).collect();
        Ok(Self { weights })
    }

    /// Equal weights over `n` nodes.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_raw(vec![1.0; n])
    }

    /// Reads a CSV file with a `weight` column; values are normalized on load.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            weight: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut raw = Vec::new();
        for row in rdr.deserialize::<Row>() {
            raw.push(row?.weight);
        }
        Self::from_raw(raw)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, node: usize) -> Option<f64> {
        self.weights.get(node).copied()
    }

    /// Index of the heaviest node; the lowest index wins ties.
    pub fn heaviest(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }
}

/// Sampling weight function `f` (also used as the averaging function `g`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightFunction {
    /// `f(m) = m`
    #[default]
    Identity,
    /// `f(m) = 1`, zero-weight nodes included.
    ConstantOne,
    /// `f(m) = m^alpha` with `alpha > 0`, so `f(0) = 0`.
    Power(f64),
}

impl WeightFunction {
    pub fn apply(&self, m: f64) -> f64 {
        match *self {
            WeightFunction::Identity => m,
            WeightFunction::ConstantOne => 1.0,
            WeightFunction::Power(alpha) => {
                if m == 0.0 {
                    0.0
                } else {
                    m.powf(alpha)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            WeightFunction::Power(alpha) if !(alpha.is_finite() && alpha > 0.0) => Err(
                Error::invalid(format!("power weight function needs alpha > 0, got {alpha}")),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFunction::Identity => f.write_str("id"),
            WeightFunction::ConstantOne => f.write_str("one"),
            WeightFunction::Power(alpha) => write!(f, "pow:{alpha}"),
        }
    }
}

impl FromStr for WeightFunction {
    type Err = Error;

    /// Accepts `id`, `one` and `pow:<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        let f = match s.trim() {
            "id" | "identity" => WeightFunction::Identity,
            "one" | "constant" | "constant_one" => WeightFunction::ConstantOne,
            other => {
                let alpha = other
                    .strip_prefix("pow:")
                    .or_else(|| other.strip_prefix("power:"))
                    .ok_or_else(|| {
                        Error::invalid(format!(
                            "unknown weight function `{other}` (expected id, one or pow:<alpha>)"
                        ))
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("bad power exponent in `{other}`: {e}")))?;
                WeightFunction::Power(alpha)
            }
        };
        f.validate()?;
        Ok(f)
    }
}

/// Probabilities `p_i = f(m_i) / sum_j f(m_j)` of drawing each node.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    probs: Vec<f64>,
    source: WeightFunction,
}

impl SamplingDistribution {
    /// A distribution given directly by (unnormalized) probabilities, as if
    /// produced by the identity weight function.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let w = WeightDistribution::from_raw(probs)?;
        Ok(Self {
            probs: w.weights,
            source: WeightFunction::Identity,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, node: usize) -> Option<f64> {
        self.probs.get(node).copied()
    }

    pub fn source(&self) -> WeightFunction {
        self.source
    }

    /// Number of nodes that can actually be drawn.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }
}

pub fn sampling_distribution(
    w: &WeightDistribution,
    f: WeightFunction,
) -> Result<SamplingDistribution> {
    f.validate()?;
    let image: Vec<f64> = w.weights.iter().map(|&m| f.apply(m)).collect();
    let total = compensated_sum(image.iter().copied());
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::invalid(format!(
            "weight function {f} maps every weight to zero"
        )));
    }
    let probs = image.into_iter().map(|x| x / total).collect();
    Ok(SamplingDistribution { probs, source: f })
}

/// An `r`-splitting of one node into parts with relative sizes `x_1..x_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    node: usize,
    fractions: Vec<f64>,
}

impl SplitSpec {
    pub fn new(node: usize, fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::invalid("a split needs at least one fraction"));
        }
        if fractions.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::invalid("split fractions must be positive"));
        }
        let total = compensated_sum(fractions.iter().copied());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "split fractions sum to {total}, expected 1"
            )));
        }
        Ok(Self { node, fractions })
    }

    /// Split `node` into `r` equal parts.
    pub fn equal(node: usize, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("split count r must be at least 1"));
        }
        Self::new(node, vec![1.0 / r as f64; r])
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn r(&self) -> usize {
        self.fractions.len()
    }
}

/// Index bookkeeping for a split: node `i` is replaced in place by the
/// parts `i, i+1, ..., i+r-1`, and later nodes shift by `r - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMap {
    node: usize,
    r: usize,
    len_before: usize,
}

impl SplitMap {
    pub(crate) fn new(node: usize, r: usize, len_before: usize) -> Self {
        Self { node, r, len_before }
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// New indices of the split parts.
    pub fn parts(&self) -> std::ops::Range<usize> {
        self.node..self.node + self.r
    }

    /// New index of an unsplit node, or `None` for the split node itself.
    pub fn map_unsplit(&self, old: usize) -> Option<usize> {
        use std::cmp::Ordering::*;
        match old.cmp(&self.node) {
            Less => Some(old),
            Equal => None,
            Greater => Some(old + self.r - 1),
        }
    }

    /// New index of a node drawn pre-split, with `part` choosing among the
    /// split parts when `old` is the split node.
    #[inline]
    pub fn map_draw(&self, old: usize, part: usize) -> usize {
        if old < self.node {
            old
        } else if old == self.node {
            self.node + part
        } else {
            old + self.r - 1
        }
    }

    pub fn len_after(&self) -> usize {
        self.len_before + self.r - 1
    }
}

pub fn apply_split(
    w: &WeightDistribution,
    split: &SplitSpec,
) -> Result<(WeightDistribution, SplitMap)> {
    let node = split.node;
    let m = w
        .get(node)
        .ok_or_else(|| Error::invalid(format!("split node {} out of range", node + 1)))?;
    if m <= 0.0 {
        return Err(Error::invalid(format!(
            "cannot split node {} with zero weight",
            node + 1
        )));
    }
    let mut weights = Vec::with_capacity(w.len() + split.r() - 1);
    weights.extend_from_slice(&w.weights[..node]);
    weights.extend(split.fractions.iter().map(|x| m * x));
    weights.extend_from_slice(&w.weights[node + 1..]);
    let map = SplitMap::new(node, split.r(), w.len());
    Ok((WeightDistribution { weights }, map))
}

/// Zipf parameters: rank-`j` weight proportional to `j^(-s)` over `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfParams {
    pub s: f64,
    pub n: usize,
}

pub fn zipf_weights(params: ZipfParams) -> Result<WeightDistribution> {
    if params.n == 0 {
        return Err(Error::invalid("Zipf network size n must be at least 1"));
    }
    if !(params.s.is_finite() && params.s >= 0.0) {
        return Err(Error::invalid(format!(
            "Zipf exponent s must be >= 0, got {}",
            params.s
        )));
    }
    let raw: Vec<f64> = (1..=params.n).map(|j| (j as f64).powf(-params.s)).collect();
    WeightDistribution::from_raw(raw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub sup_norm: f64,
    pub l1_norm: f64,
}

/// Sup and l1 distance between two distributions; the shorter one is padded
/// with zeros.
pub fn distribution_distance(p: &SamplingDistribution, q: &SamplingDistribution) -> Distance {
    vector_distance(p.probs(), q.probs())
}

pub fn vector_distance(p: &[f64], q: &[f64]) -> Distance {
    let n = p.len().max(q.len());
    let diffs = (0..n).map(|i| {
        let a = p.get(i).copied().unwrap_or(0.0);
        let b = q.get(i).copied().unwrap_or(0.0);
        (a - b).abs()
    });
    let mut sup = 0.0_f64;
    let l1 = compensated_sum(diffs.inspect(|d| sup = sup.max(*d)));
    Distance {
        sup_norm: sup,
        l1_norm: l1,
    }
}
