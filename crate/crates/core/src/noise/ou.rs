use serde::{Deserialize, Serialize};

use super::{NoiseForcing, NoiseSpec};
use crate::spectral::StokesBasis;
use crate::Scalar;

/// Which grid states a simulation keeps. Norm series are always kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recording {
    All,
    Every(usize),
    Final,
    Steps(Vec<usize>),
}

impl Recording {
    pub(crate) fn keeps(&self, step: usize, last: usize) -> bool {
        match self {
            Recording::All => true,
            Recording::Every(k) => step % (*k).max(1) == 0 || step == last,
            Recording::Final => step == last,
            Recording::Steps(s) => s.contains(&step),
        }
    }
}

/// Stokes OU path `dZ + νAZ dt = Q^{1/2} dW`, `Z(0) = 0`, on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OUTrajectory<T> {
    pub dt: f64,
    /// `|AZ(t_n)|` for `n = 0..=n_steps`.
    pub a_norm: Vec<f64>,
    /// Running grid supremum of `|AZ|`.
    pub theta: Vec<f64>,
    /// Recorded `(step, coefficients)` pairs.
    pub states: Vec<(usize, Vec<T>)>,
}

impl<T: Scalar> OUTrajectory<T> {
    pub fn n_steps(&self) -> usize {
        self.a_norm.len() - 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.a_norm.len()).map(|n| n as f64 * self.dt).collect()
    }

    /// `Θ` at grid step `n`.
    pub fn theta_at(&self, n: usize) -> f64 {
        self.theta[n]
    }

    pub fn state_at(&self, step: usize) -> Option<&[T]> {
        self.states
            .iter()
            .find(|(s, _)| *s == step)
            .map(|(_, z)| z.as_slice())
    }
}

/// Exact per-mode recursion `z_{n+1} = e^{-νλdt} z_n + conv_n`.
pub fn simulate_stokes_ou<T: Scalar>(
    basis: &StokesBasis<T>,
    forcing: &NoiseForcing<T>,
    recording: &Recording,
) -> OUTrajectory<T> {
    let m = basis.len();
    let last = forcing.n_steps;
    let mut z = vec![T::zero(); m];
    let mut a_norm: Vec<f64> = Vec::with_capacity(last + 1);
    let mut theta: Vec<f64> = Vec::with_capacity(last + 1);
    let mut states = Vec::new();
    a_norm.push(0.0);
    theta.push(0.0);
    if recording.keeps(0, last) {
        states.push((0, z.clone()));
    }
    let lambda = basis.eigenvalues();
    for n in 0..last {
        let conv = forcing.conv_step(n);
        let mut sq = T::zero();
        for i in 0..m {
            z[i] = forcing.decay[i] * z[i] + conv[i];
            let x = lambda[i] * z[i];
            sq += x * x;
        }
        let norm = sq.sqrt().as_f64();
        a_norm.push(norm);
        theta.push(theta[n].max(norm));
        if recording.keeps(n + 1, last) {
            states.push((n + 1, z.clone()));
        }
    }
    OUTrajectory {
        dt: forcing.dt.as_f64(),
        a_norm,
        theta,
        states,
    }
}

/// Variance of mode `i` of `Z(t)`: `σ²(1 − e^{−2νλt}) / (2νλ)`.
pub fn ou_mode_variance(lambda: f64, sigma: f64, nu: f64, t: f64) -> f64 {
    let mu = nu * lambda;
    sigma * sigma * -(-2.0 * mu * t).exp_m1() / (2.0 * mu)
}

/// `E|AZ(t)|² = Σ λᵢ² σᵢ² (1 − e^{−2νλᵢt}) / (2νλᵢ)`.
pub fn ou_second_moment_oracle<T: Scalar>(
    basis: &StokesBasis<T>,
    noise: &NoiseSpec<T>,
    nu: f64,
    t: f64,
) -> f64 {
    basis
        .eigenvalues()
        .iter()
        .zip(&noise.sigmas)
        .map(|(l, s)| {
            let l = l.as_f64();
            l * l * ou_mode_variance(l, s.as_f64(), nu, t)
        })
        .sum()
}
