//! Galerkin stochastic Navier–Stokes, its cut-off version, the deterministic
//! equation driven by a given path, and the derivative flow.

mod cutoff;
mod deterministic;
mod integrator;
mod martingale;
mod tangent;

use thiserror::Error;

pub use cutoff::CutoffSpec;
pub use deterministic::{
    check_local_regularity, solve_deterministic, weak_residual, DeterministicSolution,
    LocalBoundReport, LocalVerdict,
};
pub use integrator::{simulate, step, step_into, StepWorkspace, Trajectory, BLOWUP_LEVEL};
pub use martingale::{martingale_residual, martingale_series, MartingaleReport};
pub use tangent::{flow_growth_bound, simulate_tangent, TangentTrajectory};

use crate::spectral::SpectralError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("blow-up overflow at t = {time}")]
    BlowUpOverflow { time: f64 },
    #[error("time {t} is not on the grid with dt = {dt}")]
    OffGrid { t: f64, dt: f64 },
    #[error("forcing has {got} modes, basis has {expected}")]
    ForcingMismatch { expected: usize, got: usize },
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Grid index of `t`, accepting round-off of a few ulps.
pub fn grid_index(t: f64, dt: f64) -> Result<usize, DynamicsError> {
    let x = t / dt;
    let n = x.round();
    if n < 0.0 || (x - n).abs() > 1e-9 * n.max(1.0) {
        return Err(DynamicsError::OffGrid { t, dt });
    }
    Ok(n as usize)
}
