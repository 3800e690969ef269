//! Simulator for consensus-based distributed stochastic gradient descent
//! (CDSGD and momentum variants) over fixed-topology agent networks.
//!
//! Agents hold disjoint data shards and a private parameter vector. Each
//! step mixes parameters with graph neighbors through a doubly stochastic
//! interaction matrix and then takes a local stochastic gradient step. The
//! [`analysis`] module evaluates the Lyapunov function that makes this
//! dynamic a stochastic gradient method, together with the spectral
//! constants and convergence bounds it obeys, so runs can be checked
//! against theory at desk scale.

pub mod analysis;
pub mod data;
pub mod error;
pub mod objectives;
pub mod optimizers;
pub mod rng;
pub mod runner;
pub mod topology;

pub(crate) mod par;

pub use error::{Error, Result};
