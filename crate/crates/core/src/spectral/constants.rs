//! Empirical lower estimates of the constants in the transport inequalities.

use serde::{Deserialize, Serialize};

use super::{bilinear_into, BilinearWorkspace, PhysicalGrid, SpectralField, StokesBasis};
use crate::rng::{standard_normal, StreamId};
use crate::Scalar;

/// Running-maximum estimate of the best `C₀` in
/// `|A^{1/2} B(u, v)| ≤ C₀ |Au| |Av|` at one truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsEstimate {
    pub c0_hat: f64,
    /// Always `4·c0_hat²`.
    pub c_star_hat: f64,
    pub sample_count: usize,
    pub cutoff: usize,
    /// Ratio of every sampled pair, in stream order.
    pub ratios: Vec<f64>,
}

impl ConstantsEstimate {
    pub fn from_ratios(ratios: Vec<f64>, cutoff: usize) -> Self {
        let c0_hat = ratios.iter().copied().fold(0.0, f64::max);
        Self {
            c0_hat,
            c_star_hat: 4.0 * c0_hat * c0_hat,
            sample_count: ratios.len(),
            cutoff,
            ratios,
        }
    }
}

pub(crate) fn gaussian_field<T: Scalar>(basis: &StokesBasis<T>, stream: &StreamId) -> Vec<T> {
    let mut rng = stream.rng();
    (0..basis.len()).map(|_| T::of(standard_normal(&mut rng))).collect()
}

/// `|A^{1/2} B(u, v)| / (|Au|·|Av|)`.
pub fn c0_ratio<T: Scalar>(basis: &StokesBasis<T>, u: &SpectralField<T>, v: &SpectralField<T>) -> f64 {
    let mut ws = BilinearWorkspace::new(basis);
    let mut b = vec![T::zero(); basis.len()];
    bilinear_into(basis, u.coefficients(), v.coefficients(), &mut ws, &mut b);
    let num = SpectralField::from_raw(basis.id(), b).power_norm_sq(basis, T::of(0.5)).as_f64().sqrt();
    num / (u.a_norm(basis).as_f64() * v.a_norm(basis).as_f64())
}

/// Samples `n_samples` pairs with independent standard Gaussian coefficients.
/// Pair `i` is drawn from streams `stream/i/0` and `stream/i/1`, so the
/// estimate over a prefix never depends on how many samples follow.
pub fn estimate_constants<T: Scalar>(
    basis: &StokesBasis<T>,
    n_samples: usize,
    stream: &StreamId,
) -> ConstantsEstimate {
    let ratios = (0..n_samples as u64)
        .map(|i| {
            let pair = stream.child(i);
            let mut attempt = 0u64;
            loop {
                let draw = |slot: u64| {
                    let id = if attempt == 0 {
                        pair.child(slot)
                    } else {
                        pair.child(slot).child(attempt)
                    };
                    SpectralField::from_raw(basis.id(), gaussian_field(basis, &id))
                };
                let (u, v) = (draw(0), draw(1));
                if u.a_norm_sq(basis) > T::zero() && v.a_norm_sq(basis) > T::zero() {
                    break c0_ratio(basis, &u, &v);
                }
                attempt += 1;
            }
        })
        .collect();
    ConstantsEstimate::from_ratios(ratios, basis.cutoff())
}

/// `|⟨B(u, v), z⟩| / (|Dv|_{L∞} |u|_{L²} |z|_{L²})` with the sup norm taken
/// over the grid.
pub fn transport_ratio<T: Scalar>(
    basis: &StokesBasis<T>,
    grid: &PhysicalGrid<T>,
    u: &[T],
    v: &[T],
    z: &[T],
) -> f64 {
    let mut ws = BilinearWorkspace::new(basis);
    let mut b = vec![T::zero(); basis.len()];
    bilinear_into(basis, u, v, &mut ws, &mut b);
    let flux = super::dot(&b, z).as_f64().abs();
    let l2 = |c: &[T]| super::dot(c, c).as_f64().sqrt();
    flux / (grid.gradient_sup(v).as_f64() * l2(u) * l2(z))
}

/// Largest transport ratio over `n_samples` Gaussian triples.
pub fn estimate_transport_constant<T: Scalar>(
    basis: &StokesBasis<T>,
    n_samples: usize,
    stream: &StreamId,
) -> f64 {
    let grid = PhysicalGrid::exact_for_triple_products(basis);
    (0..n_samples as u64)
        .map(|i| {
            let s = stream.child(i);
            let (u, v, z) = (
                gaussian_field(basis, &s.child(0)),
                gaussian_field(basis, &s.child(1)),
                gaussian_field(basis, &s.child(2)),
            );
            transport_ratio(basis, &grid, &u, &v, &z)
        })
        .fold(0.0, f64::max)
}

/// Frobenius norm of the trilinear form `(x, y) ↦ A B(A⁻¹x, A⁻¹y)`, an
/// upper bound for `sup |A B(u, v)| / (|Au||Av|)` at this truncation.
pub fn transport_a_bound<T: Scalar>(basis: &StokesBasis<T>) -> f64 {
    let m = basis.len();
    let lambda: Vec<f64> = basis.eigenvalues().iter().map(|l| l.as_f64()).collect();
    let mut ws = BilinearWorkspace::new(basis);
    let mut b = vec![T::zero(); m];
    let mut hj = vec![T::zero(); m];
    let mut hk = vec![T::zero(); m];
    let mut total = 0.0;
    for j in 0..m {
        hj[j] = T::one();
        for k in 0..m {
            hk[k] = T::one();
            bilinear_into(basis, &hj, &hk, &mut ws, &mut b);
            let scale = 1.0 / (lambda[j] * lambda[k]);
            total += b
                .iter()
                .zip(&lambda)
                .map(|(x, l)| (x.as_f64() * l * scale).powi(2))
                .sum::<f64>();
            hk[k] = T::zero();
        }
        hj[j] = T::zero();
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_star_is_four_c0_squared() {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let est = estimate_constants(&basis, 20, &StreamId::root(3));
        assert_eq!(est.c_star_hat, 4.0 * est.c0_hat * est.c0_hat);
        assert!(est.c0_hat > 0.0);
        assert_eq!(est.sample_count, 20);
    }

    #[test]
    fn prefix_estimates_are_monotone() {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let stream = StreamId::root(5);
        let mut last = 0.0;
        for n in [1, 4, 16, 32] {
            let est = estimate_constants(&basis, n, &stream);
            assert!(est.c0_hat >= last);
            last = est.c0_hat;
        }
    }

    #[test]
    fn frobenius_bound_dominates_sampled_pairs() {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let beta = transport_a_bound(&basis);
        let stream = StreamId::root(2);
        for i in 0..20 {
            let u = SpectralField::from_raw(basis.id(), gaussian_field(&basis, &stream.child(i).child(0)));
            let v = SpectralField::from_raw(basis.id(), gaussian_field(&basis, &stream.child(i).child(1)));
            let b = crate::spectral::bilinear_b(&basis, &u, &v).unwrap();
            assert!(b.a_norm(&basis) <= beta * u.a_norm(&basis) * v.a_norm(&basis));
        }
    }

    #[test]
    fn single_mode_pairs_give_zero() {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        for i in [0, 12, 51] {
            let u = SpectralField::unit(&basis, i).scaled(2.5);
            assert_eq!(c0_ratio(&basis, &u, &u), 0.0);
        }
    }
}
