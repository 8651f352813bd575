//! Deterministic multi-agent 6-DoF spacecraft inspection simulator with a
//! control-barrier-function run time assurance filter.

pub mod asif;
pub mod config;
pub mod constraints;
pub mod controllers;
pub mod dynamics;
pub mod env;
pub mod episode;
pub mod error;
pub mod inspection;
pub mod observation;
pub mod qp;
pub mod runner;

pub use error::{Error, Result};

/// Crate version with the hash of the sources it was built from.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("INSPECT_RTA_SOURCE_HASH"));
