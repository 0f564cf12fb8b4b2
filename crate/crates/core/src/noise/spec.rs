use serde::{Deserialize, Serialize};

use crate::spectral::StokesBasis;
use crate::Scalar;

/// Diagonal noise amplitudes in the basis ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec<T> {
    pub sigmas: Vec<T>,
    /// `Σ σᵢ²`.
    pub trace: f64,
}

/// `σᵢ = λᵢ^{-3/2}`, so that `Q^{1/2} = A^{-3/2}`.
pub fn noise_coefficients<T: Scalar>(basis: &StokesBasis<T>) -> NoiseSpec<T> {
    let sigmas: Vec<T> = basis
        .eigenvalues()
        .iter()
        .map(|l| T::one() / (*l * l.sqrt()))
        .collect();
    NoiseSpec::from_sigmas(sigmas)
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn from_sigmas(sigmas: Vec<T>) -> Self {
        let trace = sigmas.iter().map(|s| s.as_f64() * s.as_f64()).sum();
        Self { sigmas, trace }
    }

    /// `σ ≡ 0`.
    pub fn zero(modes: usize) -> Self {
        Self::from_sigmas(vec![T::zero(); modes])
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self::from_sigmas(self.sigmas.iter().map(|s| *s * factor).collect())
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn first_mode_amplitude() {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let noise = noise_coefficients(&basis);
        let expected = (4.0 * PI * PI).powf(-1.5);
        assert!((noise.sigmas[0] - expected).abs() < 1e-15 * expected);
        assert!(noise.trace > 0.0 && noise.trace.is_finite());
    }

    #[test]
    fn squared_amplitudes_are_inverse_cubes() {
        let basis = StokesBasis::<f64>::new(1.3, 2).unwrap();
        let noise = noise_coefficients(&basis);
        for (s, l) in noise.sigmas.iter().zip(basis.eigenvalues()) {
            assert!((s * s * l.powi(3) - 1.0).abs() < 1e-13);
        }
    }
}
