//! Prime-race modeling library: Dirichlet character tables, zero-set handling,
//! covariance structure, Gaussian and oscillatory-sum Monte Carlo samplers,
//! deterministic Gaussian analytics, an exact log-density sieve, and the
//! harmonic pair-sum toolkit.

pub mod analytics;
pub mod arith;
pub mod characters;
pub mod covariance;
pub mod error;
pub mod harmonic;
pub mod linalg;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod sieve;
pub mod special;
pub mod zeros;

pub use error::{RaceError, Result};
