//! Exact distributions and Monte Carlo verification for Λ-coalescents and their
//! fixation line.
//!
//! * [`numerics`]: special functions, endpoint-singular quadrature, renewal recursion.
//! * [`rates`]: the driving measure and all transition rates.
//! * [`analytics`]: records, depth, last coalescence, hitting probabilities.
//! * [`simulator`]: block-counting chain, partition coalescent, fixation line,
//!   lookdown model and the branching representation at α = 1.
//! * [`stats`]: goodness-of-fit tests used to compare exact and simulated values.

pub mod analytics;
pub mod error;
pub mod numerics;
pub mod rates;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
