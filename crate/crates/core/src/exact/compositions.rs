use itertools::Itertools;

use crate::numeric::binomial;

/// All compositions of `m` into `parts` positive integers, for every `m` up
/// to a bound, with their multinomial coefficients `m! / (x_1! ... x_s!)`.
#[derive(Debug, Clone)]
pub(crate) struct CompositionTable {
    parts: usize,
    /// Indexed by `m`.
    by_total: Vec<Compositions>,
}

#[derive(Debug, Clone, Default)]
struct Compositions {
    coefs: Vec<f64>,
    /// `coefs.len() * parts` entries, row-major.
    xs: Vec<u16>,
}

impl CompositionTable {
    pub fn new(parts: usize, max_total: usize) -> Self {
        let mut by_total = vec![Compositions::default(); max_total + 1];
        for (m, slot) in by_total.iter_mut().enumerate() {
            let mut current = Vec::with_capacity(parts);
            fill(m, parts, &mut current, slot);
        }
        Self { parts, by_total }
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn max_total(&self) -> usize {
        self.by_total.len() - 1
    }

    /// Iterates over `(coefficient, x)` for compositions of `m`.
    pub fn of(&self, m: usize) -> impl Iterator<Item = (f64, &[u16])> + '_ {
        let c = &self.by_total[m];
        let width = self.parts;
        c.coefs.iter().enumerate().map(move |(row, &coef)| {
            (coef, &c.xs[row * width..(row + 1) * width])
        })
    }
}

fn fill(remaining: usize, left: usize, current: &mut Vec<u16>, out: &mut Compositions) {
    if left == 0 {
        if remaining == 0 {
            let mut coef = 1.0;
            let mut rest: usize = current.iter().map(|&x| x as usize).sum();
            for &x in current.iter() {
                coef *= binomial(rest, x as usize);
                rest -= x as usize;
            }
            out.coefs.push(coef);
            out.xs.extend_from_slice(current);
        }
        return;
    }
    if remaining < left {
        return;
    }
    for x in 1..=remaining - (left - 1) {
        current.push(x as u16);
        fill(remaining - x, left - 1, current, out);
        current.pop();
    }
}

/// Positive-probability nodes of a distribution.
#[derive(Debug, Clone)]
pub(crate) struct Support {
    pub nodes: Vec<usize>,
    pub probs: Vec<f64>,
}

impl Support {
    pub fn new(p: &[f64]) -> Self {
        let (nodes, probs) = p
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.0)
            .map(|(i, &x)| (i, x))
            .unzip();
        Self { nodes, probs }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn position(&self, node: usize) -> Option<usize> {
        self.nodes.iter().position(|&n| n == node)
    }

    /// Probability mass outside the positions in `subset` and `exclude`.
    pub fn complement_mass(&self, subset: &[usize], exclude: Option<usize>) -> f64 {
        crate::numeric::compensated_sum(
            (0..self.len())
                .filter(|j| Some(*j) != exclude && !subset.contains(j))
                .map(|j| self.probs[j]),
        )
    }

    /// Calls `f(subset, sums)` for every subset of support positions of the
    /// given size that avoids `exclude`, where `sums[m]` is
    ///
    /// `sum over compositions x of m: multinomial(m; x) * prod_a p_a^x_a`,
    ///
    /// i.e. the probability that `m` draws hit exactly the nodes of the
    /// subset, each at least once.
    pub fn for_each_subset<F>(&self, table: &CompositionTable, exclude: Option<usize>, mut f: F)
    where
        F: FnMut(&[usize], &[f64]),
    {
        let size = table.parts();
        let max_total = table.max_total();
        let candidates: Vec<usize> = (0..self.len()).filter(|j| Some(*j) != exclude).collect();
        let mut powers = vec![vec![0.0; max_total + 1]; size];
        let mut sums = vec![0.0; max_total + 1];
        for subset in candidates.into_iter().combinations(size) {
            for (row, &a) in powers.iter_mut().zip(&subset) {
                let p = self.probs[a];
                let mut acc = 1.0;
                for slot in row.iter_mut() {
                    *slot = acc;
                    acc *= p;
                }
            }
            for (m, sum) in sums.iter_mut().enumerate() {
                let mut total = 0.0;
                for (coef, xs) in table.of(m) {
                    let mut term = coef;
                    for (row, &x) in powers.iter().zip(xs) {
                        term *= row[x as usize];
                    }
                    total += term;
                }
                *sum = total;
            }
            f(&subset, &sums);
        }
    }
}
