//! Achievable rates, exact mutual information and link-level simulation for
//! two-layer superposed ("cocktail") BPSK over the AWGN channel.
//!
//! * [`mi`]: Gaussian-mixture entropy and discrete-input AWGN mutual information.
//! * [`scheme`]: layer amplitudes, the layered rate and the exact-MI oracles.
//! * [`sim`]: seeded Monte Carlo detection and sampling MI estimates.
//! * [`sweep`]: SNR sweeps, CSV output and crossover search.
//! * [`cli`], [`config`]: the `cocktail` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod mi;
pub mod scheme;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
