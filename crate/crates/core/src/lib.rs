//! Simulation and verification toolkit for the one-dimensional random walk
//! that remembers the largest distance from the origin it has reached.
//!
//! Away from that maximum the walk is a simple symmetric walk; on it, the
//! walker steps outward with probability `z^γ/(1+z^γ)`. The crate provides
//! the closed-form limit laws ([`model`]), an exact step simulator
//! ([`direct`]), a journey-decomposition simulator ([`cycles`]), estimators
//! and reference samplers ([`stats`]), and verification suites ([`verify`]).

pub mod cli;
pub mod cycles;
pub mod direct;
pub mod error;
pub mod model;
pub mod records;
pub mod rng;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
