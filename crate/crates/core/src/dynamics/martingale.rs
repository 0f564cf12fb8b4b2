use serde::{Deserialize, Serialize};

use super::{grid_index, DynamicsError, Trajectory};
use crate::noise::NoiseSpec;
use crate::spectral::{bilinear_into, dot, BilinearWorkspace, StokesBasis};
use crate::stats::MeanEstimate;
use crate::Scalar;

/// `M_t^φ = ⟨u_t − u_0, φ⟩ + ∫_0^t ν⟨u, Aφ⟩ + ⟨B(u, u), φ⟩ ds` on every
/// grid point of `states` (consecutive steps starting at 0), with trapezoid
/// time integrals.
pub fn martingale_series<T: Scalar>(
    basis: &StokesBasis<T>,
    states: &[Vec<T>],
    phi: &[T],
    nu: f64,
    dt: f64,
) -> Vec<f64> {
    let mut ws = BilinearWorkspace::new(basis);
    let mut b = vec![T::zero(); basis.len()];
    let a_phi: Vec<T> = phi
        .iter()
        .zip(basis.eigenvalues())
        .map(|(p, l)| *p * *l)
        .collect();
    let drift: Vec<f64> = states
        .iter()
        .map(|u| {
            bilinear_into(basis, u, u, &mut ws, &mut b);
            nu * dot(u, &a_phi).as_f64() + dot(&b, phi).as_f64()
        })
        .collect();
    let u0 = dot(&states[0], phi).as_f64();
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(states.len());
    for (n, u) in states.iter().enumerate() {
        if n > 0 {
            integral += 0.5 * dt * (drift[n - 1] + drift[n]);
        }
        out.push(dot(u, phi).as_f64() - u0 + integral);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub t: f64,
    pub n_paths: usize,
    /// `E[M_t^φ]`.
    pub mean_residual: MeanEstimate,
    /// Mean realized `Σ(ΔM)²` over `[0, t]`.
    pub realized_qv: f64,
    /// `t · Σ σᵢ² ⟨φ, hᵢ⟩²`.
    pub expected_qv: f64,
    pub qv_ratio: f64,
}

/// Needs every grid state up to `t` recorded on each path.
pub fn martingale_residual<T: Scalar>(
    basis: &StokesBasis<T>,
    noise: &NoiseSpec<T>,
    ensemble: &[Trajectory<T>],
    phi: &[T],
    t: f64,
) -> Result<MartingaleReport, DynamicsError> {
    let first = ensemble.first().ok_or(DynamicsError::EmptyEnsemble)?;
    let dt = first.dt;
    let n = grid_index(t, dt)?;
    let mut finals = Vec::with_capacity(ensemble.len());
    let mut qv = 0.0;
    for traj in ensemble {
        let states: Option<Vec<Vec<T>>> = (0..=n).map(|k| traj.state_at(k).map(|s| s.to_vec())).collect();
        let states = states.ok_or(DynamicsError::OffGrid { t, dt })?;
        let m = martingale_series(basis, &states, phi, traj.nu, dt);
        qv += m.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>();
        finals.push(m[n]);
    }
    let expected_qv = t * noise
        .sigmas
        .iter()
        .zip(phi)
        .map(|(s, p)| (s.as_f64() * p.as_f64()).powi(2))
        .sum::<f64>();
    let realized_qv = qv / ensemble.len() as f64;
    Ok(MartingaleReport {
        t,
        n_paths: ensemble.len(),
        mean_residual: MeanEstimate::from_samples(&finals),
        realized_qv,
        expected_qv,
        qv_ratio: if expected_qv > 0.0 { realized_qv / expected_qv } else { 0.0 },
    })
}
