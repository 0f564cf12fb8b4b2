use serde::{Deserialize, Serialize};

use super::integrator::{a_norm_sq, step_into, StepWorkspace};
use super::{CutoffSpec, Trajectory, BLOWUP_LEVEL};
use crate::noise::{NoiseForcing, NoiseSpec, Recording};
use crate::spectral::{bilinear_into, BilinearWorkspace, StokesBasis};
use crate::Scalar;

/// Derivative flow `D_h u` of the cut-off dynamics along one base path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentTrajectory<T> {
    pub base: Trajectory<T>,
    pub h0: Vec<T>,
    /// `|A D_h u(t_n)|`.
    pub d_a_norm: Vec<f64>,
    pub states: Vec<(usize, Vec<T>)>,
    /// `I = Σ_n dt·⟨Σ⁻¹ D_{n+1}, ξ_n⟩` with `ξ_n` the noise of step `n` and
    /// `Σ` its covariance; `E[ψ(u_N)·I]/ε` is the directional derivative of
    /// `E ψ(u_N)` for the discrete chain.
    pub bel_integrand: f64,
    /// `Σ_n dt²·⟨D_{n+1}, Σ⁻¹ D_{n+1}⟩`, whose mean is `E[I²]`.
    pub bel_energy: f64,
}

/// Co-integrates the exact derivative of the discrete step map:
///
/// ```text
/// D⁺ = e^{-νA dt}(D − dt[χ(B(D, u) + B(u, D)) + 2χ′⟨Au, AD⟩ B(u, u)])
/// ```
///
/// The base path is produced by the same arithmetic as [`simulate`](super::simulate).
pub fn simulate_tangent<T: Scalar>(
    basis: &StokesBasis<T>,
    noise: &NoiseSpec<T>,
    x0: &[T],
    h: &[T],
    cutoff: &CutoffSpec,
    forcing: &NoiseForcing<T>,
    recording: &Recording,
) -> TangentTrajectory<T> {
    let m = basis.len();
    let last = forcing.n_steps;
    let dt = forcing.dt;
    let lambda = basis.eigenvalues();
    let weights: Vec<f64> = lambda
        .iter()
        .zip(&noise.sigmas)
        .map(|(l, s)| {
            let mu = forcing.nu.as_f64() * l.as_f64();
            let var = s.as_f64().powi(2) * crate::noise::forcing_variance(mu, dt.as_f64());
            if var > 0.0 {
                dt.as_f64() / var
            } else {
                0.0
            }
        })
        .collect();

    let mut ws = StepWorkspace::new(basis);
    let mut bws = BilinearWorkspace::new(basis);
    let mut b1 = vec![T::zero(); m];
    let mut b2 = vec![T::zero(); m];
    let mut u = x0.to_vec();
    let mut next = vec![T::zero(); m];
    let mut d = h.to_vec();
    let a0 = a_norm_sq(basis, &u).as_f64().sqrt();
    let mut out = TangentTrajectory {
        base: Trajectory {
            dt: dt.as_f64(),
            nu: forcing.nu.as_f64(),
            cutoff: Some(*cutoff),
            a_norm: vec![a0],
            sup_a: vec![a0],
            states: Vec::new(),
            tau_r: (a0 >= cutoff.radius).then_some(0),
            blow_up: None,
        },
        h0: h.to_vec(),
        d_a_norm: vec![a_norm_sq(basis, &d).as_f64().sqrt()],
        states: Vec::new(),
        bel_integrand: 0.0,
        bel_energy: 0.0,
    };
    if recording.keeps(0, last) {
        out.base.states.push((0, u.clone()));
        out.states.push((0, d.clone()));
    }
    let two = T::one() + T::one();
    for n in 0..last {
        let r = a_norm_sq(basis, &u).as_f64();
        let chi = T::of(cutoff.chi(r));
        let chi_prime = T::of(cutoff.chi_prime(r));
        let conv = forcing.conv_step(n);
        step_into(basis, &u, &forcing.decay, dt, conv, Some(cutoff), &mut ws, &mut next);
        bilinear_into(basis, &d, &u, &mut bws, &mut b1);
        bilinear_into(basis, &u, &d, &mut bws, &mut b2);
        let s: T = (0..m).map(|i| lambda[i] * lambda[i] * u[i] * d[i]).sum();
        let mut inc = 0.0;
        let mut energy = 0.0;
        for i in 0..m {
            let j = chi * (b1[i] + b2[i]) + two * chi_prime * s * ws.b[i];
            d[i] = forcing.decay[i] * (d[i] - dt * j);
            let di = d[i].as_f64();
            inc += di * conv[i].as_f64() * weights[i];
            energy += di * di * weights[i] * dt.as_f64();
        }
        out.bel_integrand += inc;
        out.bel_energy += energy;
        std::mem::swap(&mut u, &mut next);

        let a = a_norm_sq(basis, &u).as_f64().sqrt();
        let ad = a_norm_sq(basis, &d).as_f64().sqrt();
        if !a.is_finite() || a > BLOWUP_LEVEL || !ad.is_finite() {
            out.base.blow_up = Some(out.base.time(n + 1));
            break;
        }
        out.base.a_norm.push(a);
        out.base.sup_a.push(out.base.sup_a[n].max(a));
        if out.base.tau_r.is_none() && a >= cutoff.radius {
            out.base.tau_r = Some(n + 1);
        }
        out.d_a_norm.push(ad);
        if recording.keeps(n + 1, last) {
            out.base.states.push((n + 1, u.clone()));
            out.states.push((n + 1, d.clone()));
        }
    }
    out
}

/// Growth rate `κ(R)` with `|A D_h u(t)|² ≤ e^{κ t} |Ah|²` for the cut-off
/// dynamics at radius `R`, given `β ≥ sup |A B(x, y)| / (|Ax||Ay|)`.
///
/// On the support of `χ`, `|Au| ≤ ρ = (R² + 2)^{1/2}`, so the linearized
/// drift has `A`-operator norm at most `2βρ + 2·(3/4)·ρ·βρ²`; each discrete
/// step multiplies `|AD|` by at most `1 + dt` times that.
pub fn flow_growth_bound(beta: f64, radius: f64) -> f64 {
    let rho = (radius * radius + CutoffSpec::WIDTH).sqrt();
    2.0 * (2.0 * beta * rho + 1.5 * beta * rho.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate;
    use crate::noise::{noise_coefficients, sample_wiener};
    use crate::StreamId;

    fn setup() -> (StokesBasis<f64>, NoiseSpec<f64>, NoiseForcing<f64>, Vec<f64>) {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let noise = noise_coefficients(&basis);
        let path = sample_wiener(&basis, 100, 1e-3, &StreamId::root(8));
        let f = NoiseForcing::from_wiener(&basis, &noise, 1.0, &path);
        let x0: Vec<f64> = (0..basis.len()).map(|i| 0.05 * ((i % 9) as f64 - 4.0)).collect();
        (basis, noise, f, x0)
    }

    #[test]
    fn zero_direction_stays_zero() {
        let (basis, noise, f, x0) = setup();
        let t = simulate_tangent(&basis, &noise, &x0, &vec![0.0; basis.len()], &CutoffSpec::new(2.0), &f, &Recording::Final);
        assert!(t.d_a_norm.iter().all(|x| *x == 0.0));
        assert_eq!(t.bel_integrand, 0.0);
    }

    #[test]
    fn base_path_matches_simulate() {
        let (basis, noise, f, x0) = setup();
        let cutoff = CutoffSpec::new(1.5);
        let h: Vec<f64> = (0..basis.len()).map(|i| (i as f64).sin()).collect();
        let t = simulate_tangent(&basis, &noise, &x0, &h, &cutoff, &f, &Recording::Final);
        let s = simulate(&basis, &x0, &f, Some(&cutoff), &Recording::Final);
        assert_eq!(t.base.a_norm, s.a_norm);
        assert_eq!(t.base.final_state(), s.final_state());
    }

    #[test]
    fn linear_in_direction() {
        let (basis, noise, f, x0) = setup();
        let cutoff = CutoffSpec::new(1.5);
        let h: Vec<f64> = (0..basis.len()).map(|i| (i as f64 * 0.3).cos()).collect();
        let h2: Vec<f64> = h.iter().map(|x| 2.0 * x).collect();
        let a = simulate_tangent(&basis, &noise, &x0, &h, &cutoff, &f, &Recording::Final);
        let b = simulate_tangent(&basis, &noise, &x0, &h2, &cutoff, &f, &Recording::Final);
        for (x, y) in a.states[0].1.iter().zip(&b.states[0].1) {
            assert!((2.0 * x - y).abs() <= 1e-13 * y.abs().max(1.0));
        }
    }
}
