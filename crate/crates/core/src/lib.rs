//! Simulation of quantum-secure authentication of an optical scattering key.
//!
//! The readout chain is modeled as linear algebra over K optical modes
//! ([`optics`]), detection as Poisson photon counting ([`protocol`]), and the
//! adversary as a catalog of response strategies ([`adversary`]). [`stats`]
//! holds the exact error-rate analysis and [`cli`] the experiment runner behind
//! the `qsa` binary.

pub mod adversary;
pub mod cli;
pub mod error;
pub mod optics;
pub mod protocol;
pub mod seeding;
pub mod stats;

pub use error::{QsaError, Result};
