#![no_std]
// When std is linked (tests, or a dependent enabling std features) the
// float methods resolve inherently and the libm `Float` imports go unused.
#![allow(unused_imports)]
//! Boundary integral solver for two-dimensional Laplace transmission
//! problems on polygonal composite media with triple junctions.

extern crate alloc;

pub mod error;
pub mod geometry;
pub mod quad;

pub use error::{Error, ErrorKind, Result};
pub mod exponents;
pub mod potentials;
pub mod cornerbasis;
pub mod discretize;
pub mod solve;
pub mod postproc;

#[cfg(test)]
mod oracle;
