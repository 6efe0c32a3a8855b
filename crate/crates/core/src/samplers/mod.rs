//! Sampling constructions for ranked random weights and random partitions.
//!
//! Every sampler takes an explicit generator; build one from a [`RngSeed`]
//! for reproducible streams.

mod broken_stick;
mod crp;
mod dirichlet;
mod seed;
mod sticks;
mod subordinator;
mod weights;

pub use broken_stick::{broken_stick_expected, sample_broken_stick};
pub(crate) use crp::sample_crp_state;
pub use crp::{crp_seat, sample_crp};
pub use dirichlet::{sample_gamma_dirichlet, sample_symmetric_dirichlet, GammaDirichlet};
pub use seed::{par_ensemble, PdRng, RngSeed};
pub use sticks::{break_sticks, sample_beta, sample_sticks_size_biased, Sticks, TruncationRule};
pub use subordinator::{
    sample_subordinator, SubordinatorSample, TemperedStableSubordinator, TemperedStableTail,
};
pub use weights::{rank_normalize, RankedWeights};
