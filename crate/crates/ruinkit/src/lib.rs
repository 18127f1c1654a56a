//! Command line front end and Monte Carlo harness for `ruinkit-core`.
//!
//! The core crate holds the analytic machinery; this crate adds everything
//! that needs an operating system: configuration files, deterministic text
//! output, a parallel path simulator, and the `ruinkit` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod sim;
