use serde::{Deserialize, Serialize};

use super::{CutoffSpec, DynamicsError};
use crate::noise::{NoiseForcing, Recording};
use crate::spectral::{bilinear_into, BilinearWorkspace, SpectralField, StokesBasis};
use crate::Scalar;

/// States with `|Au|` beyond this are treated as numerical blow-up.
pub const BLOWUP_LEVEL: f64 = 1e30;

/// Scratch space for repeated steps.
#[derive(Clone, Debug)]
pub struct StepWorkspace<T> {
    pub(crate) bilinear: BilinearWorkspace<T>,
    pub(crate) b: Vec<T>,
}

impl<T: Scalar> StepWorkspace<T> {
    pub fn new(basis: &StokesBasis<T>) -> Self {
        Self {
            bilinear: BilinearWorkspace::new(basis),
            b: vec![T::zero(); basis.len()],
        }
    }
}

pub(crate) fn a_norm_sq<T: Scalar>(basis: &StokesBasis<T>, u: &[T]) -> T {
    u.iter()
        .zip(basis.eigenvalues())
        .map(|(c, l)| {
            let x = *c * *l;
            x * x
        })
        .sum()
}

/// One exponential Euler step
///
/// ```text
/// u⁺ = e^{-νA dt} (u − dt·χ(|Au|²)·B(u, u)) + noise
/// ```
///
/// where `noise` is the Stokes-weighted increment of the step (a row of
/// [`NoiseForcing::conv`]). Without a cut-off `χ ≡ 1`. Leaves `B(u, u)` in
/// `ws.b`.
pub fn step_into<T: Scalar>(
    basis: &StokesBasis<T>,
    u: &[T],
    decay: &[T],
    dt: T,
    noise: &[T],
    cutoff: Option<&CutoffSpec>,
    ws: &mut StepWorkspace<T>,
    out: &mut [T],
) {
    bilinear_into(basis, u, u, &mut ws.bilinear, &mut ws.b);
    let weight = match cutoff {
        Some(c) => dt * T::of(c.chi(a_norm_sq(basis, u).as_f64())),
        None => dt,
    };
    for i in 0..u.len() {
        out[i] = decay[i] * (u[i] - weight * ws.b[i]) + noise[i];
    }
}

/// Single step on fields; `noise` is the Stokes-weighted increment.
pub fn step<T: Scalar>(
    basis: &StokesBasis<T>,
    u: &SpectralField<T>,
    dt: T,
    noise: &[T],
    cutoff: Option<&CutoffSpec>,
    nu: T,
) -> Result<SpectralField<T>, DynamicsError> {
    u.check_basis(basis)?;
    if noise.len() != basis.len() {
        return Err(DynamicsError::ForcingMismatch {
            expected: basis.len(),
            got: noise.len(),
        });
    }
    if !u.is_finite() {
        return Err(DynamicsError::BlowUpOverflow { time: 0.0 });
    }
    let decay = crate::noise::NoiseForcing::zero(basis, nu, dt, 0).decay;
    let mut ws = StepWorkspace::new(basis);
    let mut out = vec![T::zero(); basis.len()];
    step_into(basis, u.coefficients(), &decay, dt, noise, cutoff, &mut ws, &mut out);
    SpectralField::from_coefficients(basis, out).map_err(Into::into)
}

/// Grid path of the (cut-off) Galerkin dynamics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub dt: f64,
    pub nu: f64,
    pub cutoff: Option<CutoffSpec>,
    /// `|Au(t_n)|` for every computed grid point.
    pub a_norm: Vec<f64>,
    /// Running supremum of `a_norm`.
    pub sup_a: Vec<f64>,
    pub states: Vec<(usize, Vec<T>)>,
    /// First grid step with `|Au| ≥ R` for the configured cut-off; `None`
    /// stands for `+∞`. The continuous stopping time may precede it by up to
    /// one step.
    pub tau_r: Option<usize>,
    /// Time at which the path overflowed; the series stop there.
    pub blow_up: Option<f64>,
}

impl<T: Scalar> Trajectory<T> {
    /// Number of completed steps.
    pub fn n_steps(&self) -> usize {
        self.a_norm.len() - 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// First grid step with `|Au| ≥ level`.
    pub fn first_passage(&self, level: f64) -> Option<usize> {
        self.a_norm.iter().position(|a| *a >= level)
    }

    pub fn state_at(&self, step: usize) -> Option<&[T]> {
        self.states
            .iter()
            .find(|(s, _)| *s == step)
            .map(|(_, u)| u.as_slice())
    }

    pub fn final_state(&self) -> Option<&[T]> {
        self.states.last().map(|(_, u)| u.as_slice())
    }

    pub fn blown_up(&self) -> bool {
        self.blow_up.is_some()
    }
}

/// Integrates from `x0` over the whole forcing horizon.
pub fn simulate<T: Scalar>(
    basis: &StokesBasis<T>,
    x0: &[T],
    forcing: &NoiseForcing<T>,
    cutoff: Option<&CutoffSpec>,
    recording: &Recording,
) -> Trajectory<T> {
    assert_eq!(forcing.modes, basis.len(), "forcing does not match basis");
    let last = forcing.n_steps;
    let mut ws = StepWorkspace::new(basis);
    let mut u = x0.to_vec();
    let mut next = vec![T::zero(); u.len()];
    let a0 = a_norm_sq(basis, &u).as_f64().sqrt();
    let mut traj = Trajectory {
        dt: forcing.dt.as_f64(),
        nu: forcing.nu.as_f64(),
        cutoff: cutoff.copied(),
        a_norm: vec![a0],
        sup_a: vec![a0],
        states: Vec::new(),
        tau_r: None,
        blow_up: None,
    };
    if recording.keeps(0, last) {
        traj.states.push((0, u.clone()));
    }
    let level = cutoff.map(|c| c.radius);
    if level.is_some_and(|r| a0 >= r) {
        traj.tau_r = Some(0);
    }
    for n in 0..last {
        step_into(
            basis,
            &u,
            &forcing.decay,
            forcing.dt,
            forcing.conv_step(n),
            cutoff,
            &mut ws,
            &mut next,
        );
        std::mem::swap(&mut u, &mut next);
        let a = a_norm_sq(basis, &u).as_f64().sqrt();
        if !a.is_finite() || a > BLOWUP_LEVEL {
            traj.blow_up = Some(traj.time(n + 1));
            if recording.keeps(last, last) {
                traj.states.push((n + 1, u.clone()));
            }
            break;
        }
        traj.a_norm.push(a);
        traj.sup_a.push(traj.sup_a[n].max(a));
        if traj.tau_r.is_none() && level.is_some_and(|r| a >= r) {
            traj.tau_r = Some(n + 1);
        }
        if recording.keeps(n + 1, last) {
            traj.states.push((n + 1, u.clone()));
        }
    }
    traj
}
