//! Exact and Monte Carlo quantities for the identical-quanta release-timing
//! channel: admissible-permutation counts and entropies, ordered-arrival
//! mutual-information bounds, and capacity lower bounds per quantum and per
//! unit time.

pub mod bounds;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod permutation;
pub mod quadrature;
pub mod simulation;
pub mod special;

pub use distributions::{DeadlineInputDensity, EmissionMarginal, FirstPassageModel};
pub use error::{Error, Result};
