//! Two-parameter Poisson-Dirichlet partition structures applied to capital
//! distribution curves.
//!
//! The crate is organised bottom-up:
//!
//! - [`partition`]: shapes of exchangeable partitions, class sizes and the
//!   box add/remove moves between levels `n - 1` and `n`.
//! - [`laws`]: exact Ewens and Pitman sampling formulas in log space.
//! - [`samplers`]: gamma-normalised Dirichlet, size-biased stick-breaking,
//!   the Chinese restaurant process, the tempered stable subordinator
//!   representation and the broken stick.
//! - [`chain`]: the down-up Markov chain on shapes of fixed size.
//! - [`diffusion`]: Wright-Fisher stick diffusions, the market value
//!   diffusion and the prices restored from them.
//! - [`fitting`]: averaged model curves and least-squares fits of
//!   `(alpha, theta)` to ranked market weights.
//! - [`cli`]: the `pdmarket` command-line front end.

// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cli;
pub mod diffusion;
pub mod error;
pub mod fitting;
pub mod laws;
pub mod params;
pub mod partition;
pub mod samplers;

pub use error::{Error, Result};
pub use params::{PdParams, Regime};
pub use partition::{FrequencyVector, PartitionClass};
pub use samplers::{RankedWeights, RngSeed};
