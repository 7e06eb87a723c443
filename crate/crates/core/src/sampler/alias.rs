use rand::Rng;

use crate::error::{Error, Result};

/// Vose alias table over the positive-probability entries of a distribution.
///
/// Zero-probability entries are left out of the table entirely, so they can
/// never be returned regardless of rounding in the construction.
#[derive(Debug, Clone)]
pub struct AliasTable {
    threshold: Vec<f64>,
    alias: Vec<u32>,
    /// Original index of each table slot.
    index: Vec<usize>,
}

impl AliasTable {
    pub fn new(probs: &[f64]) -> Result<Self> {
        let index: Vec<usize> = probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, _)| i)
            .collect();
        if index.is_empty() {
            return Err(Error::invalid("alias table needs a positive probability"));
        }
        if index.len() > u32::MAX as usize {
            return Err(Error::invalid("too many nodes for an alias table"));
        }
        let n = index.len();
        let total: f64 = index.iter().map(|&i| probs[i]).sum();
        let mut scaled: Vec<f64> = index.iter().map(|&i| probs[i] * n as f64 / total).collect();

        let mut small = Vec::new();
        let mut large = Vec::new();
        for (slot, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(slot);
            } else {
                large.push(slot);
            }
        }
        let mut threshold = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            threshold[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for slot in small.into_iter().chain(large) {
            threshold[slot] = 1.0;
        }
        Ok(Self {
            threshold,
            alias,
            index,
        })
    }

    /// Number of entries that can be drawn.
    pub fn support_size(&self) -> usize {
        self.index.len()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let slot = rng.random_range(0..self.threshold.len());
        let u: f64 = rng.random();
        let chosen = if u < self.threshold[slot] {
            slot
        } else {
            self.alias[slot] as usize
        };
        self.index[chosen]
    }
}
