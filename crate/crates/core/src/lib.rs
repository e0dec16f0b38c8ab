//! Conformal scattering for the defocusing cubic wave equation on compactified
//! model spacetimes.
//!
//! The crate solves the standard and characteristic Cauchy problems on the
//! Einstein cylinder (the compactification of Minkowski space) and on a rescaled
//! Schwarzschild patch near spacelike infinity, builds the trace operators to
//! null infinity and the scattering map between past and future radiation
//! profiles, and audits the energy estimates behind them.

pub mod characteristic;
pub mod energy;
pub mod error;
pub mod evolution;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod scattering;

pub use error::{Error, Result};
