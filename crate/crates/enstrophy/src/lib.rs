//! Std companion of `enstrophy-core`: FFT drift, file formats, run
//! configuration, parallel ensembles, quadrature oracles and the identity
//! suite behind the `enstrophy` binary.

#![forbid(unsafe_code)]
#![warn(missing_docs)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod ensemble;
pub mod identities;
pub mod io;
pub mod oracles;
pub mod pseudospectral;
pub mod report;

pub use pseudospectral::{AnyDrift, EngineKind, PseudospectralDrift};
