use serde::{Deserialize, Serialize};

use super::integrator::{a_norm_sq, StepWorkspace};
use super::{martingale_series, Trajectory, BLOWUP_LEVEL};
use crate::noise::{NoiseForcing, Recording};
use crate::spectral::{bilinear_into, StokesBasis};
use crate::Scalar;

/// Solution of `u(t) + ∫(νAu + B(u, u)) = x0 + w(t)` computed as `u = v + z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterministicSolution<T> {
    pub u: Trajectory<T>,
    /// `|Av(t_n)|`.
    pub v_a_norm: Vec<f64>,
    /// `|Az(t_n)|` of the Stokes path of `w`.
    pub z_a_norm: Vec<f64>,
    /// Running supremum of `z_a_norm`.
    pub theta: Vec<f64>,
}

/// Splits `u = v + z` with `z` the Stokes path of the forcing, so that
/// `v⁺ = e^{-νA dt}(v − dt·B(v + z, v + z))`.
pub fn solve_deterministic<T: Scalar>(
    basis: &StokesBasis<T>,
    x0: &[T],
    forcing: &NoiseForcing<T>,
    recording: &Recording,
) -> DeterministicSolution<T> {
    let m = basis.len();
    let last = forcing.n_steps;
    let mut ws = StepWorkspace::new(basis);
    let mut v = x0.to_vec();
    let mut z = vec![T::zero(); m];
    let mut u = x0.to_vec();
    let a0 = a_norm_sq(basis, &u).as_f64().sqrt();
    let mut sol = DeterministicSolution {
        u: Trajectory {
            dt: forcing.dt.as_f64(),
            nu: forcing.nu.as_f64(),
            cutoff: None,
            a_norm: vec![a0],
            sup_a: vec![a0],
            states: Vec::new(),
            tau_r: None,
            blow_up: None,
        },
        v_a_norm: vec![a0],
        z_a_norm: vec![0.0],
        theta: vec![0.0],
    };
    if recording.keeps(0, last) {
        sol.u.states.push((0, u.clone()));
    }
    for n in 0..last {
        bilinear_into(basis, &u, &u, &mut ws.bilinear, &mut ws.b);
        let conv = forcing.conv_step(n);
        for i in 0..m {
            let a = forcing.decay[i];
            v[i] = a * (v[i] - forcing.dt * ws.b[i]);
            z[i] = a * z[i] + conv[i];
            u[i] = v[i] + z[i];
        }
        let au = a_norm_sq(basis, &u).as_f64().sqrt();
        if !au.is_finite() || au > BLOWUP_LEVEL {
            sol.u.blow_up = Some(sol.u.time(n + 1));
            break;
        }
        let az = a_norm_sq(basis, &z).as_f64().sqrt();
        sol.u.a_norm.push(au);
        sol.u.sup_a.push(sol.u.sup_a[n].max(au));
        sol.v_a_norm.push(a_norm_sq(basis, &v).as_f64().sqrt());
        sol.z_a_norm.push(az);
        sol.theta.push(sol.theta[n].max(az));
        if recording.keeps(n + 1, last) {
            sol.u.states.push((n + 1, u.clone()));
        }
    }
    sol
}

/// Largest `|⟨u(t) − x0, φ⟩ + ∫(ν⟨u, Aφ⟩ + ⟨B(u, u), φ⟩) − ⟨w(t), φ⟩|` over
/// the grid, with `w(t) = Σ dw`. Needs all states recorded.
pub fn weak_residual<T: Scalar>(
    basis: &StokesBasis<T>,
    solution: &Trajectory<T>,
    forcing: &NoiseForcing<T>,
    phi: &[T],
) -> f64 {
    let states: Vec<Vec<T>> = solution.states.iter().map(|(_, u)| u.clone()).collect();
    let g = martingale_series(basis, &states, phi, solution.nu, solution.dt);
    let mut w = 0.0;
    let mut worst: f64 = g[0].abs();
    for n in 1..g.len() {
        w += forcing
            .dw_step(n - 1)
            .iter()
            .zip(phi)
            .map(|(d, p)| d.as_f64() * p.as_f64())
            .sum::<f64>();
        worst = worst.max((g[n] - w).abs());
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalVerdict {
    Pass,
    Fail,
    HypothesesViolated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalBoundReport {
    pub k: f64,
    pub epsilon: f64,
    pub c_star: f64,
    pub a_x0: f64,
    pub theta_eps: f64,
    /// `ε ≤ 1/(5 C* K²)`.
    pub epsilon_ok: bool,
    /// `θ_ε² ≤ K²/4`.
    pub theta_ok: bool,
    /// `(K² + θ_ε²)(1/(2K²) + C* ε) < 1`.
    pub lemma_ok: bool,
    pub sup_a: f64,
    pub verdict: LocalVerdict,
    /// `|Av(s)|² + θ_ε² ≤ y0 / (1 − C* s y0)` at every grid point.
    pub riccati_holds: bool,
    /// Smallest `rhs − lhs` relative to `rhs` along the path.
    pub riccati_margin: f64,
    pub blown_up: bool,
}

/// Solves over the forcing horizon `ε` and checks `sup |Au| < 2K`.
pub fn check_local_regularity<T: Scalar>(
    basis: &StokesBasis<T>,
    x0: &[T],
    forcing: &NoiseForcing<T>,
    k: f64,
    c_star: f64,
) -> LocalBoundReport {
    let sol = solve_deterministic(basis, x0, forcing, &Recording::Final);
    let dt = forcing.dt.as_f64();
    let epsilon = forcing.n_steps as f64 * dt;
    let a_x0 = sol.u.a_norm[0];
    let theta_eps = *sol.theta.last().expect("theta has the initial point");
    let epsilon_ok = epsilon <= 1.0 / (5.0 * c_star * k * k);
    let theta_ok = theta_eps * theta_eps <= k * k / 4.0;
    let lemma_ok = (k * k + theta_eps * theta_eps) * (0.5 / (k * k) + c_star * epsilon) < 1.0;
    let sup_a = sol.u.sup_a.last().copied().unwrap_or(a_x0);
    let blown_up = sol.u.blown_up();

    let theta_sq = theta_eps * theta_eps;
    let y0 = a_x0 * a_x0 + theta_sq;
    let mut riccati_margin = f64::INFINITY;
    for (n, v) in sol.v_a_norm.iter().enumerate() {
        let s = n as f64 * dt;
        let denom = 1.0 - c_star * s * y0;
        if denom <= 0.0 {
            break;
        }
        let rhs = y0 / denom;
        let lhs = v * v + theta_sq;
        riccati_margin = riccati_margin.min((rhs - lhs) / rhs);
    }
    let riccati_holds = !blown_up && riccati_margin >= -1e-12;

    let verdict = if !(epsilon_ok && theta_ok) || a_x0 > k {
        LocalVerdict::HypothesesViolated
    } else if !blown_up && sup_a < 2.0 * k {
        LocalVerdict::Pass
    } else {
        LocalVerdict::Fail
    };
    LocalBoundReport {
        k,
        epsilon,
        c_star,
        a_x0,
        theta_eps,
        epsilon_ok,
        theta_ok,
        lemma_ok,
        sup_a,
        verdict,
        riccati_holds,
        riccati_margin,
        blown_up,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate;
    use crate::noise::{noise_coefficients, sample_wiener};
    use crate::StreamId;

    fn setup(steps: usize) -> (StokesBasis<f64>, NoiseForcing<f64>) {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let noise = noise_coefficients(&basis);
        let path = sample_wiener(&basis, steps, 1e-3, &StreamId::root(21));
        let f = NoiseForcing::from_wiener(&basis, &noise, 1.0, &path);
        (basis, f)
    }

    #[test]
    fn zero_forcing_single_mode_is_heat_decay() {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let f = NoiseForcing::zero(&basis, 1.0, 1e-3, 50);
        let mut x0 = vec![0.0; basis.len()];
        x0[7] = 1.5;
        let sol = solve_deterministic(&basis, &x0, &f, &Recording::Final);
        let expected = 1.5 * (-basis.eigenvalue(7) * 0.05).exp();
        assert!((sol.u.final_state().unwrap()[7] - expected).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_stochastic_integrator_on_shared_forcing() {
        let (basis, f) = setup(200);
        let x0: Vec<f64> = (0..basis.len()).map(|i| 0.01 * ((i % 7) as f64 - 3.0)).collect();
        let det = solve_deterministic(&basis, &x0, &f, &Recording::All);
        let sto = simulate(&basis, &x0, &f, None, &Recording::All);
        for ((_, a), (_, b)) in det.u.states.iter().zip(&sto.states) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weak_residual_is_small() {
        let (basis, f) = setup(100);
        let x0: Vec<f64> = (0..basis.len()).map(|i| 0.02 * ((i % 5) as f64 - 2.0)).collect();
        let sol = solve_deterministic(&basis, &x0, &f, &Recording::All);
        for i in 0..5 {
            let mut phi = vec![0.0; basis.len()];
            phi[i] = 1.0;
            let r = weak_residual(&basis, &sol.u, &f, &phi);
            assert!(r < 1e-3, "mode {i}: {r}");
        }
    }

    #[test]
    fn violated_theta_gate() {
        let (basis, f) = setup(50);
        let report = check_local_regularity(&basis, &vec![0.0; basis.len()], &f.scaled(1e4), 0.1, 0.01);
        assert!(!report.theta_ok);
        assert_eq!(report.verdict, LocalVerdict::HypothesesViolated);
    }
}
