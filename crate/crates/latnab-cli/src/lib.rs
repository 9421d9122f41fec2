//! Library surface of the `latnab` command-line tool.
//!
//! The binary is a thin argument parser over `latnab` itself; the one piece
//! with real logic is the [`reproduce`] harness, exposed here so the
//! acceptance tests can drive it and read the shipped reference tables.

pub mod reproduce;
