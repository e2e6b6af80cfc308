//! Two-phase Stefan solver in moving (ALE) polar coordinates, with
//! spectral constants, energy diagnostics and independent oracles.

pub mod ale;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod grid;
pub mod harmonic;
pub mod heat;
pub mod interface;
pub mod io;
pub mod modal;
pub mod mollifier;
pub mod oracles;
pub mod sim;
pub mod spectral;
pub mod stencil;

pub use error::{Result, StefanError};
