use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{invalid, map_paths, FrozenConstants, LabError, Model, Observable};
use crate::dynamics::{simulate, simulate_tangent, CutoffSpec};
use crate::noise::Recording;
use crate::rng::standard_normal;
use crate::stats::{linear_fit, MeanEstimate, Z95};
use crate::{Scalar, StreamId};

/// Directional derivative of `x ↦ E ψ(u(ε; x))` along `h` for the cut-off
/// dynamics, by the integration-by-parts weight and by central differences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub epsilon: f64,
    pub radius: f64,
    pub a_h: f64,
    pub n: usize,
    pub bel: MeanEstimate,
    pub fd: MeanEstimate,
    pub fd_delta: f64,
    /// `|bel − fd| ≤ 1.96 (SE_bel² + SE_fd²)^{1/2}`.
    pub agree: bool,
    /// `C ‖ψ‖∞ |Ah| e^{C R⁶ ε} / ε` with the frozen `C`.
    pub bound: Option<f64>,
    /// `(E[ψ²] E[I²])^{1/2} / ε`.
    pub cauchy_schwarz: f64,
}

/// Both estimators share the noise of each path.
#[allow(clippy::too_many_arguments)]
pub fn bel_gradient<T: Scalar>(
    model: &Model<T>,
    frozen: Option<&FrozenConstants>,
    x0: &[T],
    h: &[T],
    radius: f64,
    psi: &Observable,
    epsilon: f64,
    fd_delta: f64,
    n: usize,
    stream: &StreamId,
) -> Result<GradientEstimate, LabError> {
    if n < 2 {
        return Err(invalid("n", "must be at least 2"));
    }
    if !(fd_delta > 0.0) {
        return Err(invalid("fd_delta", "must be positive"));
    }
    if !(radius > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    let steps = model.steps(epsilon)?;
    if steps == 0 {
        return Err(invalid("epsilon", "must be at least one step"));
    }
    let cutoff = CutoffSpec::new(radius);
    let plus: Vec<T> = x0.iter().zip(h).map(|(x, d)| *x + T::of(fd_delta) * *d).collect();
    let minus: Vec<T> = x0.iter().zip(h).map(|(x, d)| *x - T::of(fd_delta) * *d).collect();
    let rows = map_paths(n, stream, |_, s| {
        let f = model.forcing(steps, s);
        let tan = simulate_tangent(&model.basis, &model.noise, x0, h, &cutoff, &f, &Recording::Final);
        let value = |traj: &crate::dynamics::Trajectory<T>| {
            traj.final_state().map_or(0.0, |y| psi.eval(&model.basis, y))
        };
        let v0 = value(&tan.base);
        let vp = value(&simulate(&model.basis, &plus, &f, Some(&cutoff), &Recording::Final));
        let vm = value(&simulate(&model.basis, &minus, &f, Some(&cutoff), &Recording::Final));
        (v0 * tan.bel_integrand / epsilon, (vp - vm) / (2.0 * fd_delta), v0 * v0, tan.bel_energy)
    });
    let bel = MeanEstimate::from_samples(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let fd = MeanEstimate::from_samples(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let psi_sq = rows.iter().map(|r| r.2).sum::<f64>() / n as f64;
    let energy = rows.iter().map(|r| r.3).sum::<f64>() / n as f64;
    let a_h = model.a_norm(h);
    let combined = (bel.std_error.powi(2) + fd.std_error.powi(2)).sqrt();
    Ok(GradientEstimate {
        epsilon,
        radius,
        a_h,
        n,
        bel,
        fd,
        fd_delta,
        agree: (bel.mean - fd.mean).abs() <= Z95 * combined,
        bound: frozen.map(|c| {
            c.c_bel * psi.sup_norm() * a_h * (c.c_bel * radius.powi(6) * epsilon).exp() / epsilon
        }),
        cauchy_schwarz: (psi_sq * energy).sqrt() / epsilon,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowCase {
    pub radius: f64,
    pub a_x0: f64,
    pub a_h: f64,
    /// `max_n log(|AD(t_n)|² / |Ah|²) − C R⁶ t_n`; the bound holds when `≤ 0`.
    pub worst_margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowBoundReport {
    pub t: f64,
    pub c_flow: f64,
    pub passed: usize,
    pub cases: Vec<FlowCase>,
}

impl FlowBoundReport {
    pub fn all_hold(&self) -> bool {
        self.passed == self.cases.len()
    }
}

fn random_direction<T: Scalar>(model: &Model<T>, rng: &mut impl Rng, target: f64) -> Vec<T> {
    let g: Vec<T> = (0..model.modes()).map(|_| T::of(standard_normal(rng))).collect();
    model.with_a_norm(&g, target)
}

/// `|A D_h u(t)|² ≤ e^{C R⁶ t}|Ah|²` at every step of `cases` random
/// configurations: `R` uniform in `[R_min, radius_max]`, `|Ax0|` uniform in
/// `[0, R]`, `|Ah|` uniform in `(0, 1]`.
pub fn flow_bound_check<T: Scalar>(
    model: &Model<T>,
    frozen: &FrozenConstants,
    t: f64,
    cases: usize,
    radius_max: f64,
    stream: &StreamId,
) -> Result<FlowBoundReport, LabError> {
    if radius_max < frozen.flow_radius_min {
        return Err(invalid("radius_max", "must be at least the calibrated minimum radius"));
    }
    let steps = model.steps(t)?;
    let dt = model.dt.as_f64();
    let out = map_paths(cases, stream, |_, s| {
        let mut rng = s.named("config").rng();
        let radius = rng.random_range(frozen.flow_radius_min..=radius_max);
        let a_x0 = rng.random_range(0.0..=1.0) * radius;
        let x0 = random_direction(model, &mut rng, a_x0);
        let a_h = rng.random_range(0.0..1.0f64).max(1e-3);
        let h = random_direction(model, &mut rng, a_h);
        let f = model.forcing(steps, s);
        let tan = simulate_tangent(&model.basis, &model.noise, &x0, &h, &CutoffSpec::new(radius), &f, &Recording::Final);
        let a_h = tan.d_a_norm[0];
        let rate = frozen.flow_rate(radius);
        let worst_margin = tan
            .d_a_norm
            .iter()
            .enumerate()
            .map(|(n, d)| 2.0 * (d / a_h).ln() - rate * n as f64 * dt)
            .fold(f64::NEG_INFINITY, f64::max);
        FlowCase {
            radius,
            a_x0: model.a_norm(&x0),
            a_h,
            worst_margin,
            holds: worst_margin <= 1e-12 && !tan.base.blown_up(),
        }
    });
    Ok(FlowBoundReport {
        t,
        c_flow: frozen.c_flow,
        passed: out.iter().filter(|c| c.holds).count(),
        cases: out,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdOrderReport {
    pub deltas: Vec<f64>,
    /// `|A((u(x0 + δh) − u(x0))/δ − D_h u)|` at the final time.
    pub errors: Vec<f64>,
    /// Slope of `log error` against `log δ`.
    pub order: f64,
}

/// Forward differences against the tangent flow on one noise path.
#[allow(clippy::too_many_arguments)]
pub fn fd_order_check<T: Scalar>(
    model: &Model<T>,
    x0: &[T],
    h: &[T],
    radius: f64,
    t: f64,
    deltas: &[f64],
    stream: &StreamId,
) -> Result<FdOrderReport, LabError> {
    if deltas.len() < 2 || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(invalid("deltas", "need at least two positive step sizes"));
    }
    let steps = model.steps(t)?;
    let cutoff = CutoffSpec::new(radius);
    let f = model.forcing(steps, stream);
    let tan = simulate_tangent(&model.basis, &model.noise, x0, h, &cutoff, &f, &Recording::Final);
    let base = tan.base.final_state().expect("kept").to_vec();
    let d = &tan.states.last().expect("kept").1;
    let errors: Vec<f64> = deltas
        .iter()
        .map(|&delta| {
            let x: Vec<T> = x0.iter().zip(h).map(|(a, b)| *a + T::of(delta) * *b).collect();
            let traj = simulate(&model.basis, &x, &f, Some(&cutoff), &Recording::Final);
            let y = traj.final_state().expect("kept");
            let diff: Vec<T> = y
                .iter()
                .zip(&base)
                .zip(d)
                .map(|((p, q), g)| T::of(((*p - *q).as_f64() / delta) - g.as_f64()))
                .collect();
            model.a_norm(&diff)
        })
        .collect();
    let lx: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let order = linear_fit(&lx, &ly).map_or(f64::NAN, |fit| fit.slope);
    Ok(FdOrderReport {
        deltas: deltas.to_vec(),
        errors,
        order,
    })
}
