//! Exact-arithmetic workbench for Euclidean lattices.
//!
//! Everything here is computed over arbitrary-precision rationals: shells and
//! theta series by Fincke-Pohst enumeration, dual-quotient class tables,
//! exhaustive censuses of integral overlattices with isometry classification,
//! spherical-design parameters of shells, and minimal-vector projections.
//! There is no floating point anywhere in the crate.

pub mod designs;
pub mod error;
pub mod exact;
pub mod isometry;
pub mod lattice;
pub mod overlattice;
pub mod quotient;
pub mod shells;
pub mod venkov;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
