//! Large-pool pricing asymptotics for investment-grade CDO tranches over
//! heterogeneous name pools.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function
//! of immutable inputs: default-time laws and pools ([`pool`]), the constrained
//! entropy problem and its dual multiplier ([`entropy`]), the Merton
//! first-passage example ([`merton`]), the pre-exponential pricing formula
//! ([`asymptotics`]), finite-state systemic mixtures ([`correlation`]) and the
//! exponentially tilted Monte Carlo used to validate all of it
//! ([`montecarlo`]).
//!
//! IO, configuration files, parallel drivers and the command line live in the
//! companion `cdo-ld` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod correlation;
pub mod entropy;
mod error;
pub mod merton;
pub mod montecarlo;
pub mod pool;
pub mod special;

pub use error::{Error, Result};
