//! Greedy sampling of weighted nodes, the voting power it gives each node,
//! and what a node gains by splitting its weight.
//!
//! ```
//! use greedy_voting::exact::split_gain_k2;
//! use greedy_voting::weights::{SamplingDistribution, SplitSpec};
//!
//! let p = SamplingDistribution::from_probs(vec![0.8, 0.2])?;
//! let gain = split_gain_k2(&p, &SplitSpec::equal(0, 2)?)?;
//! assert!(gain > 0.09);
//! # Ok::<(), greedy_voting::Error>(())
//! ```
//!
//! The guide in `book/` walks through each module with runnable examples.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exact;
pub mod fairness;
pub mod fpc;
pub mod numeric;
pub mod sampler;
pub mod weights;

pub use error::{Dimension, Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/greedy-sampling.md")]
    mod greedy_sampling {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/k2.md")]
    mod k2 {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    mod coupling {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/fpc.md")]
    mod fpc {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
