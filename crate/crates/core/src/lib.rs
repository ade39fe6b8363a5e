//! Monte Carlo toolkit for one-term Edgeworth expansions of weakly dependent
//! volatility models.
//!
//! The crate simulates augmented GARCH, iterated random function, linear and
//! Volterra volatility families, estimates the cumulants of the normalised sum
//! `S_n / sqrt(n)`, evaluates the one-term expansion `Psi_n` and the
//! Gaussian-plus-Gamma surrogate law, and measures Kolmogorov and Wasserstein-1
//! distances together with characteristic-function diagnostics.
//!
//! All randomness flows from [`rngkit::StreamKey`]s, so every result is a pure
//! function of its configuration and master seed, independent of the number
//! of worker threads.

pub mod diagnostics;
pub mod edgeworth;
pub mod error;
pub mod metrics;
pub mod models;
pub mod moments;
pub mod numerics;
pub mod parallel;
pub mod pricing;
pub mod rngkit;
pub mod surrogate;

pub use error::{Error, Result};
