//! Numerical laboratory for the two lowest Robin eigenvalues of a planar
//! domain with two equal corners at distance `2L`.
//!
//! The crate bundles the closed-form corner asymptotics ([`asymptotics`]),
//! the quasimode interaction integrals ([`quasimodes`]), the exactly solvable
//! one-dimensional Robin problems ([`robin1d`]) and an independent P1
//! finite-element eigensolver ([`geometry`], [`fem`], [`sparse`],
//! [`eigensolve`]) that cross-checks all of them. [`harness`] drives
//! parameter sweeps and [`acceptance`] holds the verification suite.

pub mod acceptance;
pub mod asymptotics;
pub mod eigensolve;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod quadrature;
pub mod quasimodes;
pub mod robin1d;
pub mod sparse;

pub use error::{Error, Result};

/// 2D point / vector.
pub type Point = [f64; 2];
