//! Spectral analysis on compact groups: Fourier analysis on tori and SU(2),
//! positive elliptic multipliers and their complex powers, observability
//! constants of eigenfunction sums, space-time extension identities and
//! null-control synthesis for fractional diffusion.

pub mod error;
pub mod control;
pub mod extension;
pub mod group;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
