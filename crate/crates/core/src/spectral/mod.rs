//! Divergence-free Fourier basis, fields, the Stokes operator and the
//! Galerkin transport term.

mod basis;
mod bilinear;
pub mod constants;
mod field;
pub mod physical;

use thiserror::Error;

pub use basis::{polarization_pair, BasisId, BasisMetadata, Mode, ModeRecord, Parity, StokesBasis};
pub use bilinear::{bilinear_b, bilinear_into, BilinearWorkspace};
pub use constants::{
    estimate_constants, estimate_transport_constant, transport_a_bound, ConstantsEstimate,
};
pub use field::{apply_spectral_power, norm, NormKind, SpectralField};
pub use physical::PhysicalGrid;

pub(crate) use field::dot;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("empty basis: cutoff must be at least 1")]
    EmptyBasis,
    #[error("torus period must be positive and finite, got {0}")]
    NonPositivePeriod(f64),
    #[error("field does not live on this basis")]
    BasisMismatch,
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}
