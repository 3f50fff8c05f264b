#![no_std]

//! Operator models for contractive semigroups on finite matrix truncations.
//!
//! Everything here is exact finite linear algebra plus explicitly tracked
//! truncation error; each structural theorem the library realizes comes with
//! a residual check at a pinned tolerance.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cogenerator;
pub mod commutant;
pub mod dilation;
pub mod error;
pub mod hardy;
pub mod normal;
pub mod numerics;
pub mod sampling;
pub mod wold;

pub use error::{Error, Result};
pub use numerics::{Complex64, ComplexMatrix};
