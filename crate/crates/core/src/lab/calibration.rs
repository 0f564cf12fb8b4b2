use serde::{Deserialize, Serialize};

use super::ou::{quantile_grid, theta_samples};
use super::{LabError, Model};
use crate::dynamics::flow_growth_bound;
use crate::noise::{fit_joint_tail, TailFit, TailStatus};
use crate::spectral::{estimate_constants, estimate_transport_constant, transport_a_bound};
use crate::{Scalar, StreamId};

/// Sample sizes and grids of a calibration run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationPlan {
    pub c0_samples: usize,
    pub transport_samples: usize,
    pub tail_paths: usize,
    pub tail_epsilons: Vec<f64>,
    /// Smallest cut-off radius the derivative-flow constant must cover.
    pub flow_radius_min: f64,
}

impl Default for CalibrationPlan {
    fn default() -> Self {
        Self {
            c0_samples: 2000,
            transport_samples: 200,
            tail_paths: 10_000,
            tail_epsilons: vec![0.005, 0.01, 0.02],
            flow_radius_min: 1.0,
        }
    }
}

/// Constants estimated once and consumed, unchanged, by every verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrozenConstants {
    pub period: f64,
    pub cutoff: usize,
    pub basis_fingerprint: String,
    pub nu: f64,
    pub dt: f64,
    pub master_seed: u64,
    pub c0_hat: f64,
    pub c_star_hat: f64,
    /// Constant of `|⟨B(u, v), z⟩| ≤ C |Dv|_{L∞} |u|_{L²} |z|_{L²}`.
    pub transport_c: f64,
    pub tail_c_hat: f64,
    /// Prefactor of the dominating envelope `C e^{−η K²/ε}`.
    pub tail_c_envelope: f64,
    pub tail_eta_hat: f64,
    pub tail_r_squared: f64,
    pub tail_epsilons: Vec<f64>,
    /// Upper bound of `|A B(u, v)| / (|Au||Av|)`.
    pub flow_beta: f64,
    pub flow_radius_min: f64,
    /// `C` of `|A D_h u(t)|² ≤ e^{C R⁶ t} |Ah|²`, valid for `R ≥ flow_radius_min`.
    pub c_flow: f64,
    /// `C` of the gradient bound `C ‖ψ‖∞ |Ah| e^{C R⁶ ε} / ε`.
    pub c_bel: f64,
}

impl FrozenConstants {
    /// `C_hat·e^{−η̂ K²/(4ε)}`.
    pub fn blowup_envelope(&self, k: f64, epsilon: f64) -> f64 {
        self.tail_c_envelope * (-self.tail_eta_hat * k * k / (4.0 * epsilon)).exp()
    }

    /// Largest horizon allowed by `ε ≤ 1/(5 C* K²)`.
    pub fn epsilon_limit(&self, k: f64) -> f64 {
        1.0 / (5.0 * self.c_star_hat * k * k)
    }

    pub fn flow_rate(&self, radius: f64) -> f64 {
        self.c_flow * radius.powi(6)
    }
}

/// Estimates every frozen constant at the model's truncation.
pub fn calibrate<T: Scalar>(
    model: &Model<T>,
    plan: &CalibrationPlan,
    stream: &StreamId,
) -> Result<(FrozenConstants, TailFit), LabError> {
    if plan.c0_samples == 0 || plan.tail_paths == 0 || plan.tail_epsilons.is_empty() {
        return Err(super::invalid("calibration", "sample sizes and horizon grid must be non-empty"));
    }
    if !(plan.flow_radius_min > 0.0) {
        return Err(super::invalid("flow_radius_min", "must be positive"));
    }
    let c0 = estimate_constants(&model.basis, plan.c0_samples, &stream.named("c0"));
    let transport_c = estimate_transport_constant(&model.basis, plan.transport_samples, &stream.named("transport"));

    let mut groups = Vec::new();
    for (j, &eps) in plan.tail_epsilons.iter().enumerate() {
        let theta = theta_samples(model, eps, plan.tail_paths, &stream.named("tail").child(j as u64))?;
        let ks = quantile_grid(&theta, 0.5, 0.999, 12);
        groups.push((eps, theta, ks));
    }
    let refs: Vec<(f64, &[f64], &[f64])> = groups
        .iter()
        .map(|(e, t, k)| (*e, t.as_slice(), k.as_slice()))
        .collect();
    let tail = fit_joint_tail(&refs);
    if tail.status != TailStatus::Fitted {
        return Err(super::invalid("tail_epsilons", "tail fit failed; widen the horizon grid or add paths"));
    }

    let beta = transport_a_bound(&model.basis);
    let r = plan.flow_radius_min;
    let c_flow = flow_growth_bound(beta, r) / r.powi(6);
    let frozen = FrozenConstants {
        period: model.basis.period().as_f64(),
        cutoff: model.basis.cutoff(),
        basis_fingerprint: model.basis.metadata().fingerprint(),
        nu: model.nu.as_f64(),
        dt: model.dt.as_f64(),
        master_seed: stream.master_seed,
        c0_hat: c0.c0_hat,
        c_star_hat: c0.c_star_hat,
        transport_c,
        tail_c_hat: tail.c_hat.expect("fitted"),
        tail_c_envelope: tail.c_envelope.expect("fitted"),
        tail_eta_hat: tail.eta_hat.expect("fitted"),
        tail_r_squared: tail.r_squared.expect("fitted"),
        tail_epsilons: plan.tail_epsilons.clone(),
        flow_beta: beta,
        flow_radius_min: r,
        c_flow,
        c_bel: c_flow.max(1.0),
    };
    Ok((frozen, tail))
}
