//! Galerkin-projected transport term `B(u, v) = Π (u·∇) v`.
//!
//! Fields are lifted to complex Fourier amplitudes on the full lattice cube,
//! convolved directly over the precomputed triads `p + q = k` with `k` in the
//! canonical half lattice, and projected back onto the real polarization
//! basis. Projection onto the polarizations removes the gradient part, so no
//! separate Leray step is needed; products leaving the cube are discarded.

use num_complex::Complex;

use super::{SpectralError, SpectralField, StokesBasis};
use crate::Scalar;

type CVec3<T> = [Complex<T>; 3];

/// Scratch buffers for repeated evaluations on one basis.
#[derive(Clone, Debug)]
pub struct BilinearWorkspace<T> {
    u_hat: Vec<CVec3<T>>,
    v_hat: Vec<CVec3<T>>,
    w_hat: Vec<CVec3<T>>,
}

impl<T: Scalar> BilinearWorkspace<T> {
    pub fn new(basis: &StokesBasis<T>) -> Self {
        let zero = [Complex::new(T::zero(), T::zero()); 3];
        Self {
            u_hat: vec![zero; basis.lattice_len()],
            v_hat: vec![zero; basis.lattice_len()],
            w_hat: vec![zero; basis.half_points.len()],
        }
    }
}

/// Complex amplitudes `û(k)` with `u(x) = Σ_k û(k) exp(2πi k·x / L)`.
pub(crate) fn lift<T: Scalar>(basis: &StokesBasis<T>, coefficients: &[T], out: &mut [CVec3<T>]) {
    let zero = Complex::new(T::zero(), T::zero());
    for slot in out.iter_mut() {
        *slot = [zero; 3];
    }
    let half = basis.amplitude / (T::one() + T::one());
    let last = out.len() - 1;
    for hp in &basis.half_points {
        let mut acc = [zero; 3];
        for p in 0..2 {
            let e = basis.mode(hp.modes[p]).direction;
            let z = Complex::new(
                coefficients[hp.modes[p]] * half,
                -coefficients[hp.modes[2 + p]] * half,
            );
            for d in 0..3 {
                acc[d] += z * e[d];
            }
        }
        out[hp.lattice] = acc;
        out[last - hp.lattice] = acc.map(|c| c.conj());
    }
}

/// Writes `B(u, v)` coefficients into `out`.
pub fn bilinear_into<T: Scalar>(
    basis: &StokesBasis<T>,
    u: &[T],
    v: &[T],
    ws: &mut BilinearWorkspace<T>,
    out: &mut [T],
) {
    debug_assert_eq!(u.len(), basis.len());
    debug_assert_eq!(v.len(), basis.len());
    lift(basis, u, &mut ws.u_hat);
    lift(basis, v, &mut ws.v_hat);
    let zero = Complex::new(T::zero(), T::zero());
    for w in ws.w_hat.iter_mut() {
        *w = [zero; 3];
    }
    for t in &basis.triads {
        let up = &ws.u_hat[t.p as usize];
        let kq = &basis.wavenumbers[t.q as usize];
        let d = up[0] * kq[0] + up[1] * kq[1] + up[2] * kq[2];
        // i · (û(p)·κ_q)
        let id = Complex::new(-d.im, d.re);
        let vq = &ws.v_hat[t.q as usize];
        let w = &mut ws.w_hat[t.out as usize];
        w[0] += id * vq[0];
        w[1] += id * vq[1];
        w[2] += id * vq[2];
    }
    project(basis, &ws.w_hat, out);
}

fn project<T: Scalar>(basis: &StokesBasis<T>, w_hat: &[CVec3<T>], out: &mut [T]) {
    // <h_cos, w> = √2 L^{3/2} Re(e·ŵ(k)),  <h_sin, w> = -√2 L^{3/2} Im(e·ŵ(k))
    let scale = (T::one() + T::one()) / basis.amplitude;
    for (hp, w) in basis.half_points.iter().zip(w_hat) {
        for p in 0..2 {
            let e = basis.mode(hp.modes[p]).direction;
            let z = w[0] * e[0] + w[1] * e[1] + w[2] * e[2];
            out[hp.modes[p]] = scale * z.re;
            out[hp.modes[2 + p]] = -scale * z.im;
        }
    }
}

/// Galerkin projection of `(u·∇)v` onto the basis.
pub fn bilinear_b<T: Scalar>(
    basis: &StokesBasis<T>,
    u: &SpectralField<T>,
    v: &SpectralField<T>,
) -> Result<SpectralField<T>, SpectralError> {
    u.check_basis(basis)?;
    v.check_basis(basis)?;
    let mut ws = BilinearWorkspace::new(basis);
    let mut out = vec![T::zero(); basis.len()];
    bilinear_into(basis, u.coefficients(), v.coefficients(), &mut ws, &mut out);
    Ok(SpectralField::from_raw(basis.id(), out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_field(basis: &StokesBasis<f64>, seed: u64) -> SpectralField<f64> {
        use rand::Rng;
        let mut rng = crate::StreamId::root(seed).rng();
        let c = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        SpectralField::from_coefficients(basis, c).unwrap()
    }

    #[test]
    fn single_mode_self_transport_vanishes() {
        let basis = StokesBasis::<f64>::new(1.0, 2).unwrap();
        for i in [0, 7, 30, 100, 247] {
            let u = SpectralField::unit(&basis, i).scaled(1.7);
            let b = bilinear_b(&basis, &u, &u).unwrap();
            assert!(b.coefficients().iter().all(|c| *c == 0.0), "mode {i}");
        }
    }

    #[test]
    fn zero_arguments() {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let u = random_field(&basis, 1);
        let z = SpectralField::zeros(&basis);
        assert!(bilinear_b(&basis, &z, &u).unwrap().coefficients().iter().all(|c| *c == 0.0));
        assert!(bilinear_b(&basis, &u, &z).unwrap().coefficients().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn energy_flux_vanishes() {
        let basis = StokesBasis::<f64>::new(1.3, 2).unwrap();
        for seed in 0..5 {
            let u = random_field(&basis, seed);
            let b = bilinear_b(&basis, &u, &u).unwrap();
            let flux = b.inner(&u).unwrap();
            let scale = b.inner(&b).unwrap().sqrt() * u.inner(&u).unwrap().sqrt();
            assert!(flux.abs() <= 1e-12 * scale, "flux {flux} scale {scale}");
        }
    }

    #[test]
    fn antisymmetry_in_last_two_slots() {
        // <B(u, v), w> = -<B(u, w), v>
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let (u, v, w) = (
            random_field(&basis, 10),
            random_field(&basis, 11),
            random_field(&basis, 12),
        );
        let lhs = bilinear_b(&basis, &u, &v).unwrap().inner(&w).unwrap();
        let rhs = bilinear_b(&basis, &u, &w).unwrap().inner(&v).unwrap();
        assert!((lhs + rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn mismatched_basis() {
        let b1 = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let b2 = StokesBasis::<f64>::new(1.0, 2).unwrap();
        let u = SpectralField::zeros(&b1);
        let v = SpectralField::zeros(&b2);
        assert!(matches!(
            bilinear_b(&b1, &u, &v),
            Err(SpectralError::BasisMismatch)
        ));
    }
}
