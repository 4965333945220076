//! Sequences over a `d`-letter alphabet with long-range exclusions
//! `x_i != x_{i + f(n)}`.
//!
//! - [`jumps`]: jump rules, their enumeration and dragnet geometry.
//! - [`genrand`]: random and lexicographic one-sided generation, validation.
//! - [`search`]: exhaustive one-sided search, two-sided windows, periodicity.
//! - [`model`]: the exact compound-geometric halting model.
//! - [`stats`]: Monte Carlo harness, terminal maps, comparisons, scaling fits.
//! - [`cli`]: configuration and data emission for the `longrange` binary.

pub mod error;
pub mod genrand;
pub mod jumps;
pub mod model;
pub mod search;
pub mod stats;
pub mod cli;

pub use error::{Error, Result};
