use rayon::prelude::*;

use super::{invalid, LabError};
use crate::dynamics::grid_index;
use crate::noise::{noise_coefficients, sample_wiener, NoiseForcing, NoiseSpec};
use crate::spectral::StokesBasis;
use crate::{Scalar, StreamId};

/// Basis, noise law, viscosity and time step shared by an experiment.
#[derive(Clone, Debug)]
pub struct Model<T> {
    pub basis: StokesBasis<T>,
    pub noise: NoiseSpec<T>,
    pub nu: T,
    pub dt: T,
}

impl<T: Scalar> Model<T> {
    pub fn new(period: T, cutoff: usize, nu: T, dt: T) -> Result<Self, LabError> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(invalid("dt", "must be positive"));
        }
        if !(nu > T::zero()) || !nu.is_finite() {
            return Err(invalid("nu", "must be positive"));
        }
        let basis = StokesBasis::new(period, cutoff)?;
        let noise = noise_coefficients(&basis);
        Ok(Self {
            basis,
            noise,
            nu,
            dt,
        })
    }

    pub fn modes(&self) -> usize {
        self.basis.len()
    }

    /// Seeded noise over `n_steps` steps.
    pub fn forcing(&self, n_steps: usize, stream: &StreamId) -> NoiseForcing<T> {
        let path = sample_wiener(&self.basis, n_steps.max(1), self.dt.as_f64(), stream);
        let f = NoiseForcing::from_wiener(&self.basis, &self.noise, self.nu, &path);
        if n_steps == 0 {
            f.truncated(0)
        } else {
            f
        }
    }

    /// Grid index of `t`.
    pub fn steps(&self, t: f64) -> Result<usize, LabError> {
        Ok(grid_index(t, self.dt.as_f64())?)
    }

    /// `|Au|`.
    pub fn a_norm(&self, u: &[T]) -> f64 {
        u.iter()
            .zip(self.basis.eigenvalues())
            .map(|(c, l)| (c.as_f64() * l.as_f64()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn zeros(&self) -> Vec<T> {
        vec![T::zero(); self.modes()]
    }

    /// `direction` rescaled to `|A·| = target`.
    pub fn with_a_norm(&self, direction: &[T], target: f64) -> Vec<T> {
        let a = self.a_norm(direction);
        if a == 0.0 {
            return direction.to_vec();
        }
        direction.iter().map(|c| *c * T::of(target / a)).collect()
    }
}

/// Runs `f(i, stream.child(i))` for `i < n` in parallel; results in path order.
pub fn map_paths<R, F>(n: usize, stream: &StreamId, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize, &StreamId) -> R + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(i, &stream.child(i as u64)))
        .collect()
}
