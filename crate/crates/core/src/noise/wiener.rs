use serde::{Deserialize, Serialize};

use crate::rng::{standard_normal, StreamId};
use crate::spectral::StokesBasis;
use crate::Scalar;

/// Per-mode Brownian increments on a uniform grid.
///
/// Alongside each increment `ΔW ~ N(0, dt)` the path stores an independent
/// standard normal innovation. Together they determine the exact joint law
/// of the increment and the Stokes-weighted integral over the step; see
/// [`NoiseForcing`](super::NoiseForcing).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerPath {
    pub dt: f64,
    pub n_steps: usize,
    pub modes: usize,
    /// Row-major `n_steps × modes`.
    pub increments: Vec<f64>,
    pub innovations: Vec<f64>,
    pub stream: StreamId,
}

impl WienerPath {
    pub fn increment(&self, step: usize, mode: usize) -> f64 {
        self.increments[step * self.modes + mode]
    }

    pub fn step_increments(&self, step: usize) -> &[f64] {
        &self.increments[step * self.modes..(step + 1) * self.modes]
    }

    /// `W_i(t_n)` for every grid time, starting at 0.
    pub fn cumulative(&self, mode: usize) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.n_steps + 1);
        let mut acc = 0.0;
        w.push(acc);
        for n in 0..self.n_steps {
            acc += self.increment(n, mode);
            w.push(acc);
        }
        w
    }
}

/// Draws are taken step by step, mode by mode, as `(ΔW/√dt, innovation)`
/// pairs from the stream.
pub fn sample_wiener<T: Scalar>(
    basis: &StokesBasis<T>,
    n_steps: usize,
    dt: f64,
    stream: &StreamId,
) -> WienerPath {
    sample_wiener_modes(basis.len(), n_steps, dt, stream)
}

pub(crate) fn sample_wiener_modes(
    modes: usize,
    n_steps: usize,
    dt: f64,
    stream: &StreamId,
) -> WienerPath {
    assert!(dt > 0.0 && n_steps >= 1, "wiener path needs dt > 0 and n_steps >= 1");
    let mut rng = stream.rng();
    let sqrt_dt = dt.sqrt();
    let mut increments = Vec::with_capacity(n_steps * modes);
    let mut innovations = Vec::with_capacity(n_steps * modes);
    for _ in 0..n_steps * modes {
        increments.push(sqrt_dt * standard_normal(&mut rng));
        innovations.push(standard_normal(&mut rng));
    }
    WienerPath {
        dt,
        n_steps,
        modes,
        increments,
        innovations,
        stream: stream.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_path() {
        let a = sample_wiener_modes(5, 10, 1e-3, &StreamId::root(1).child(4));
        let b = sample_wiener_modes(5, 10, 1e-3, &StreamId::root(1).child(4));
        assert_eq!(a, b);
        let c = sample_wiener_modes(5, 10, 1e-3, &StreamId::root(1).child(5));
        assert_ne!(a.increments, c.increments);
    }

    #[test]
    fn cumulative_starts_at_zero() {
        let w = sample_wiener_modes(3, 4, 0.1, &StreamId::root(2));
        let c = w.cumulative(1);
        assert_eq!(c[0], 0.0);
        assert_eq!(c.len(), 5);
        let sum: f64 = (0..4).map(|n| w.increment(n, 1)).sum();
        assert!((c[4] - sum).abs() < 1e-15);
    }
}
