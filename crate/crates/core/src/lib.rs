//! Score distributions in round-robin tournaments with draws.
//!
//! Every pair of `n` players meets once. A game is won, drawn or lost, with
//! wins and losses equally likely and a common draw probability `p`. The
//! crate provides:
//!
//! * [`model`]: parameters, exact half-point score arithmetic and sampling;
//! * [`exact`]: convolution and brute-force enumeration oracles for small `n`,
//!   total-variation distances to the Poisson law;
//! * [`asymptotics`]: normalizing constants, Gumbel/Poisson limits for the
//!   top order statistics and closed-form moment approximations;
//! * [`montecarlo`]: a reproducible parallel replication engine.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod model;
pub mod montecarlo;

pub use error::{Error, Result};
pub use model::{validate_params, HalfPoints, ModelParams, RngStream, ScoreVector};
