//! Countable ultrahomogeneous partial orders: lazy generators, orbits, the
//! orbit criterion for copies, antichain and partition constructions, and
//! bounded certificate-carrying checks.

pub mod cli;
pub mod constructions;
pub mod copies;
pub mod error;
pub mod rational;
pub mod structures;
pub mod types_orbits;
pub mod verify;

pub use error::{Error, Result};
pub use structures::{Kind, StructureSpec, UhStructure, Width};
