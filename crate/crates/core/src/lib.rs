//! Spectral Galerkin simulation of the stochastic Navier–Stokes equation on
//! the 3-torus with noise covariance `A^{-3}`, plus the Monte Carlo
//! laboratory used to check its quantitative estimates.
//!
//! Field arithmetic is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`, which every experiment uses.

pub mod dynamics;
pub mod io;
pub mod lab;
pub mod noise;
pub mod rng;
mod scalar;
pub mod spectral;
pub mod stats;

pub use rng::StreamId;
pub use scalar::Scalar;

pub type Basis = spectral::StokesBasis<f64>;
pub type Field = spectral::SpectralField<f64>;
pub type Basis32 = spectral::StokesBasis<f32>;
pub type Field32 = spectral::SpectralField<f32>;
