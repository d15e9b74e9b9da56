//! Exact time-dependent solution of a one-dimensional model of laser-driven
//! electron emission from a flat metal surface.
//!
//! The metal occupies `x < 0` and the vacuum `x > 0`, separated by a step of
//! height `U = E_F + W` on top of which an oscillating field `E cos(omega t)`
//! acts. Everything is computed in atomic units.

pub mod error;
pub mod floquet;
pub mod kernels;
pub mod observables;
pub mod oracles;
pub mod reference_cn;
pub mod singular;
pub mod specfun;
pub mod units;
pub mod volterra;
pub mod wavefield;

pub use error::{Error, Result};
pub use units::PhysicalConfig;
