//! Numerical core for exponential functionals of Lévy processes.
//!
//! Complex gamma functions, Lévy–Khintchine exponents with the `T_β` tilt,
//! closed-form laws (gamma, Pareto, arc-sine, stable, Fréchet), Mellin
//! transforms with their recurrence equations, path samplers for the
//! functional `∫ e^{ξ_t} dt` and Kolmogorov–Smirnov statistics.
//!
//! Everything here is `no_std` + `alloc`; parallel drivers, reports and the
//! command line live in the `levyfac` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod exponent;
pub mod laws;
pub mod mellin;
pub mod paths;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use special::{cx, Complex};
