//! Exact symbolic construction and verification of classical gauge theories.

pub mod coeff;
pub mod rational;
pub mod liealg;
pub mod symexpr;
pub mod oracle;
pub mod model;
pub mod builder;
pub mod calculus;
pub mod verifier;
