//! Exact and Monte Carlo tools for δ-almost Reed–Muller codes on the binary
//! symmetric channel.

// `!(x > 0.0)` is used on purpose so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod code;
pub mod combinatorics;
pub mod decoder;
pub mod error;
pub mod gf2;
pub mod lower_bound;
pub mod orders;
pub mod selfcheck;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
