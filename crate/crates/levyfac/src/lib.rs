//! Verification harness, reports, sample cache and command-line front end
//! for the `levyfac-core` numerics.

pub mod cache;
pub mod cli;
pub mod config;
pub mod expr;
pub mod harness;
pub mod parallel;
pub mod report;
pub mod spec;

pub use levyfac_core as core;
