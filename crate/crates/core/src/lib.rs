//! Finite-grid toolkit for full conformal prediction, consonant possibility
//! contours, the Bayesian predictive comparison, and law checks for the
//! category of finite correspondences.

// `!(x > 0.0)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod bitset;
pub mod catlaws;
pub mod error;
pub mod fullcp;
pub mod grid;
pub mod harness;
pub mod imprecise;
pub mod scores;

pub use error::{Error, Result};
