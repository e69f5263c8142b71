//! Numerics for quantum wiretap channels assisted by a shared tripartite
//! resource state.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`] – labeled tensor spaces, density operators, partial traces,
//!   purifications, distance measures and the Uhlmann marginal repair.
//! * [`channels`] – CPTP maps in Kraus/Choi form, cq-ensembles and the
//!   correspondence between a resource state and its resource channel.
//! * [`entropic`] – entropies and mutual informations (base 2).
//! * [`rates`] – the assisted, trivially-assisted and unassisted single-letter
//!   private-rate functionals.
//! * [`optimize`] – derivative-free searches over ensembles and channels plus a
//!   brute-force grid oracle.
//! * [`measures`] – dense coding advantage, entanglement of purification and
//!   their duality.
//! * [`codesim`] – finite-blocklength Monte Carlo simulation of the random
//!   binning code.
//!
//! With the default `parallel` feature the embarrassingly parallel loops
//! (restarts, grid points, Monte Carlo trials) run on rayon; without it they
//! run sequentially and produce identical results.

pub mod channels;
pub mod codesim;
pub mod entropic;
mod error;
pub mod exec;
pub mod gallery;
pub mod measures;
pub mod optimize;
pub mod qcore;
pub mod rates;
pub mod scenario;

pub use error::{Error, Result};
