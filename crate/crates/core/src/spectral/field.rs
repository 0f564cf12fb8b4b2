use serde::{Deserialize, Serialize};

use super::{BasisId, SpectralError, StokesBasis};
use crate::Scalar;

/// Norms that are diagonal in the eigenbasis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// `|u|_H`
    H,
    /// `‖u‖_V = |A^{1/2} u|`
    V,
    /// `|Au|`
    DA,
    /// `|A^{1/2} u|`, identical to `V` and kept for symmetry with the powers API.
    AHalfImage,
}

/// Velocity field as real coefficients on a [`StokesBasis`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField<T> {
    coefficients: Vec<T>,
    basis: BasisId,
}

impl<T: Scalar> SpectralField<T> {
    pub fn zeros(basis: &StokesBasis<T>) -> Self {
        Self {
            coefficients: vec![T::zero(); basis.len()],
            basis: basis.id(),
        }
    }

    /// The basis function `h_i`.
    pub fn unit(basis: &StokesBasis<T>, i: usize) -> Self {
        let mut f = Self::zeros(basis);
        f.coefficients[i] = T::one();
        f
    }

    pub fn from_coefficients(
        basis: &StokesBasis<T>,
        coefficients: Vec<T>,
    ) -> Result<Self, SpectralError> {
        if coefficients.len() != basis.len() {
            return Err(SpectralError::LengthMismatch {
                expected: basis.len(),
                got: coefficients.len(),
            });
        }
        Ok(Self {
            coefficients,
            basis: basis.id(),
        })
    }

    pub(crate) fn from_raw(basis: BasisId, coefficients: Vec<T>) -> Self {
        Self {
            coefficients,
            basis,
        }
    }

    pub fn basis_id(&self) -> BasisId {
        self.basis
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [T] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<T> {
        self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients.iter().all(|c| c.is_finite())
    }

    pub fn check_basis(&self, basis: &StokesBasis<T>) -> Result<(), SpectralError> {
        if self.basis != basis.id() || self.coefficients.len() != basis.len() {
            return Err(SpectralError::BasisMismatch);
        }
        Ok(())
    }

    pub fn same_basis(&self, other: &Self) -> Result<(), SpectralError> {
        if self.basis != other.basis || self.len() != other.len() {
            return Err(SpectralError::BasisMismatch);
        }
        Ok(())
    }

    /// `⟨u, v⟩_H`.
    pub fn inner(&self, other: &Self) -> Result<T, SpectralError> {
        self.same_basis(other)?;
        Ok(dot(&self.coefficients, &other.coefficients))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| *c * factor).collect(),
            basis: self.basis,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SpectralError> {
        self.same_basis(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SpectralError> {
        self.same_basis(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// `self + factor · other`.
    pub fn axpy(&self, factor: T, other: &Self) -> Result<Self, SpectralError> {
        self.same_basis(other)?;
        Ok(self.zip_with(other, |a, b| a + factor * b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            basis: self.basis,
        }
    }

    /// `Σ λ_i^{2p} c_i²`, i.e. `|A^p u|²`.
    pub fn power_norm_sq(&self, basis: &StokesBasis<T>, p: T) -> T {
        let two_p = p + p;
        self.coefficients
            .iter()
            .zip(basis.eigenvalues())
            .map(|(c, l)| l.powf(two_p) * *c * *c)
            .sum()
    }

    /// `|Au|²`, the hot path of every stopping-time test.
    pub fn a_norm_sq(&self, basis: &StokesBasis<T>) -> T {
        self.coefficients
            .iter()
            .zip(basis.eigenvalues())
            .map(|(c, l)| {
                let x = *c * *l;
                x * x
            })
            .sum()
    }

    pub fn a_norm(&self, basis: &StokesBasis<T>) -> T {
        self.a_norm_sq(basis).sqrt()
    }

    /// `⟨A^a u, A^b v⟩ = Σ λ^{a+b} u_i v_i`.
    pub fn a_inner(&self, other: &Self, basis: &StokesBasis<T>, total_power: T) -> T {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .zip(basis.eigenvalues())
            .map(|((a, b), l)| l.powf(total_power) * *a * *b)
            .sum()
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Coefficient `i` of the output is `λ_i^p · c_i`.
pub fn apply_spectral_power<T: Scalar>(
    basis: &StokesBasis<T>,
    u: &SpectralField<T>,
    p: T,
) -> Result<SpectralField<T>, SpectralError> {
    u.check_basis(basis)?;
    let coefficients = if p == T::zero() {
        u.coefficients.clone()
    } else if p == T::one() {
        u.coefficients
            .iter()
            .zip(basis.eigenvalues())
            .map(|(c, l)| *c * *l)
            .collect()
    } else {
        u.coefficients
            .iter()
            .zip(basis.eigenvalues())
            .map(|(c, l)| *c * l.powf(p))
            .collect()
    };
    Ok(SpectralField::from_raw(u.basis, coefficients))
}

pub fn norm<T: Scalar>(
    basis: &StokesBasis<T>,
    u: &SpectralField<T>,
    kind: NormKind,
) -> Result<T, SpectralError> {
    u.check_basis(basis)?;
    let sq: T = match kind {
        NormKind::H => dot(&u.coefficients, &u.coefficients),
        NormKind::V | NormKind::AHalfImage => u
            .coefficients
            .iter()
            .zip(basis.eigenvalues())
            .map(|(c, l)| *l * *c * *c)
            .sum(),
        NormKind::DA => u.a_norm_sq(basis),
    };
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> StokesBasis<f64> {
        StokesBasis::new(1.0, 1).unwrap()
    }

    #[test]
    fn power_zero_is_identity() {
        let b = basis();
        let u = SpectralField::from_coefficients(&b, (0..b.len()).map(|i| i as f64 - 3.5).collect())
            .unwrap();
        assert_eq!(apply_spectral_power(&b, &u, 0.0).unwrap(), u);
    }

    #[test]
    fn stokes_operator_on_first_mode() {
        let b = basis();
        let out = apply_spectral_power(&b, &SpectralField::unit(&b, 0), 1.0).unwrap();
        assert_eq!(out.coefficients()[0], b.eigenvalue(0));
        assert!(out.coefficients()[1..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn negative_power_on_unit_mode() {
        let b = basis();
        let i = 17;
        let out = apply_spectral_power(&b, &SpectralField::unit(&b, i), -1.5).unwrap();
        let expected = b.eigenvalue(i).powf(-1.5);
        assert!((out.coefficients()[i] - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn unit_mode_norms() {
        let b = basis();
        for i in [0, 20, 51] {
            let h = SpectralField::unit(&b, i);
            let l = b.eigenvalue(i);
            assert_eq!(norm(&b, &h, NormKind::H).unwrap(), 1.0);
            assert!((norm(&b, &h, NormKind::V).unwrap() - l.sqrt()).abs() < 1e-12);
            assert!((norm(&b, &h, NormKind::DA).unwrap() - l).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_norms() {
        let b = basis();
        let z = SpectralField::zeros(&b);
        for kind in [NormKind::H, NormKind::V, NormKind::DA, NormKind::AHalfImage] {
            assert_eq!(norm(&b, &z, kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn basis_mismatch_rejected() {
        let b1 = basis();
        let b2 = StokesBasis::<f64>::new(2.0, 1).unwrap();
        let u = SpectralField::zeros(&b1);
        assert!(matches!(
            apply_spectral_power(&b2, &u, 1.0),
            Err(SpectralError::BasisMismatch)
        ));
        assert!(u.add(&SpectralField::zeros(&b2)).is_err());
        assert!(matches!(
            SpectralField::from_coefficients(&b1, vec![0.0; 3]),
            Err(SpectralError::LengthMismatch { expected: 52, got: 3 })
        ));
    }
}
