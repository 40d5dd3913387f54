//! Construction and verification of twisted hypergraph-product qLDPC codes.
//!
//! Start from [`skeleton::triple_code`] with two classical parity-check
//! matrices. The result carries the red, blue and green product complexes
//! and their (co)homology bases. [`operators`] synthesizes the bare and
//! CZ-dressed stabilizers, and [`protocol`] simulates the gauging
//! measurement that produces CZ magic states.

pub mod codes;
pub mod complex;
pub mod error;
pub mod f2;
pub mod io;
pub mod metrics;
pub mod operators;
pub mod pathintegral;
pub mod protocol;
pub mod skeleton;

pub use error::{Error, Result};
