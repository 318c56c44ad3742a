//! Spectral kernels for the transport-noise Euler equation on the flat torus
//! and its limiting stochastic Navier-Stokes equation, under the white-noise
//! (enstrophy) measure.
//!
//! The crate is `no_std` with `alloc`. File formats, the CLI and the FFT fast
//! path live in the `enstrophy` companion crate.
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod basis;
pub mod dynamics;
mod error;
pub mod lattice;
pub mod measure;
pub mod nonlinear;
pub mod stats;

pub use error::Error;
pub use num_complex::Complex64;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
