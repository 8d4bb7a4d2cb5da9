//! Matching migrants to capacity-constrained localities when employment is
//! subject to competition.
//!
//! The objective (expected number of employed agents) is submodular under
//! each of the three competition models in [`models`]; [`greedy`] maximizes it
//! over the intersection of the two partition matroids built in [`matroid`],
//! and [`additive`] solves the additive surrogate exactly as a baseline.
//! [`harness`] generates scenarios, runs both algorithms and persists results.

pub mod additive;
pub mod brute;
pub mod error;
mod flow;
pub mod greedy;
pub mod harness;
pub mod matroid;
pub mod models;
pub mod selftest;

pub use error::{Error, Result};
