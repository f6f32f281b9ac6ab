//! Exact Monte Carlo tests of linearity against Markov-switching means and
//! variances in autoregressive models.
//!
//! The crate is organised bottom-up:
//!
//! * [`msar`]: two-regime Markov-switching AR model, chain simulation and
//!   closed-form normal-mixture moments.
//! * [`moments`]: the four residual-moment statistics `M`, `V`, `S`, `K`.
//! * [`mc`], [`coeffs`], [`nls`]: rank-based Monte Carlo p-values, logistic
//!   first-level p-values and their regeneration, p-value combination.
//! * [`ar`], [`grid`], [`linearity`]: OLS autoregressions, AR filtering and
//!   the local / maximized Monte Carlo procedures over the AR nuisance space.
//! * [`chp`]: the supremum- and exponential-type information-matrix tests
//!   with a parametric bootstrap, used as a benchmark.
//!
//! Every stochastic routine takes either an explicit random stream or a
//! 64-bit seed from which substreams are derived with [`rng::derive_seed`],
//! so results never depend on thread scheduling.

pub mod ar;
pub mod chp;
pub mod coeffs;
pub mod error;
pub mod grid;
pub mod linearity;
pub mod mc;
pub mod moments;
pub mod msar;
pub mod nls;
pub mod normal;
pub mod rng;

pub use error::{Error, Result};
