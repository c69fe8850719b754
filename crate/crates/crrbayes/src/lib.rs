//! Bayesian calibration of the Cox-Ross-Rubinstein binomial tree from
//! historical returns.
//!
//! The library models gross returns `ξ = 1 + R` as a two-component mixture of
//! truncated normals separated at the gross risk-free rate `1 + r_f`: an
//! "up" component on `(1 + r_f, ∞)` and a "down" component on `(0, 1 + r_f)`.
//! A Metropolis-within-Gibbs sampler ([`mcmc::run_chain`]) draws from the
//! posterior of the mixture parameters, and three Monte Carlo schemes in
//! [`propagate`] turn that posterior into a distribution of option prices:
//!
//! * the **θ method** averages tree prices over return draws per parameter
//!   sample,
//! * the **ξ method** prices draws from the binned posterior predictive of
//!   `(u, d)`,
//! * the **expected-ξ method** prices each parameter sample at the truncated
//!   normal means `(E(u), E(d))`.
//!
//! [`baselines`] provides the naive sample-mean and bootstrap calibrations
//! those methods are compared against, [`utility`] selects a quote by
//! expected-utility maximization, and [`harness`] runs the whole pipeline on
//! a rolling window over a daily price series.
//!
//! All randomness flows through [`rng::RngStream`], an explicitly seeded
//! generator with cheap derived substreams, so every result in the crate is
//! bit-reproducible for a fixed seed at any level of parallelism.

pub mod baselines;
pub mod error;
pub mod harness;
pub mod mcmc;
pub mod propagate;
pub mod rng;
pub mod stats;
pub mod tree;
pub mod utility;

pub use error::{Error, Result};
pub use rng::RngStream;
