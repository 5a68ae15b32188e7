//! Phase-space Monte Carlo simulation of single-electron states in two
//! dimensions under a general electrostatic potential and a linear
//! out-of-plane magnetic field, using the signed-particle method.
//!
//! An electron state is represented by an ensemble of ±1-weighted
//! samples moving on Newtonian trajectories; the electrostatic potential
//! acts through its phase-space (Wigner) transform, which creates signed
//! particle pairs at a position-dependent rate. Densities, marginals and
//! the quasi-distribution negativity are reconstructed on grids from the
//! evolving ensemble.

pub mod config;
pub mod constants;
pub mod engine;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod histogram;
pub mod initial_state;
pub mod observables;
pub mod oracle;
pub mod output;
pub mod runner;
pub mod scenarios;
pub mod trajectories;
pub mod wigner_potential;

pub use error::{Result, SimError};
