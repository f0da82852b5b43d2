//! Weighted densities of sets of positive integers.
//!
//! For a weight ψ and a set A ⊆ ℕ = {1, 2, ...} the ψ-density is the limit of
//!
//! ```text
//!   A_ψ(n) / Σ_{k ≤ n} ψ′(k),     A_ψ(n) = Σ_{k ≤ n, k ∈ A} ψ′(k).
//! ```
//!
//! ψ = x gives asymptotic density and ψ = log(1 + x) logarithmic density.
//! The crate computes these ratios by streaming compensated sums, brackets
//! their liminf and limsup over a tail window, estimates analytic and Abel
//! densities from truncated series, and checks comparison and regularity
//! theorems at finite truncation.
//!
//! ```
//! use psidensity::{density_estimate, EstimateOptions, IntegerSet, Weight};
//!
//! let evens = IntegerSet::evens();
//! let est = density_estimate(&evens, &Weight::power(0.5)?, 1_000_000, &EstimateOptions::default())?;
//! assert!((est.point - 0.5).abs() < 0.01);
//! # Ok::<(), psidensity::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod counterexamples;
pub mod density;
mod error;
pub mod grid;
pub mod series;
pub mod sets;
pub mod sieve;
pub mod sum;
pub mod theorems;
pub mod weights;

pub use density::{
    density_estimate, density_via_subsequence, partial_sums, seq_density, DensityEstimate, DensitySeries,
    EstimateOptions, WeightTable,
};
pub use error::{Error, Result};
pub use sets::{IntegerSet, Membership, SetOp};
pub use weights::{Weight, WeightClass};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sets.md")]
    mod sets {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/densities.md")]
    mod densities {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/theorems.md")]
    mod theorems {}
    #[doc = include_str!("../../../book/src/counterexamples.md")]
    mod counterexamples {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
