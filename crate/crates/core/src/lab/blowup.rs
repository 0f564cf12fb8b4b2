use serde::{Deserialize, Serialize};

use super::{invalid, map_paths, FrozenConstants, LabError, Model};
use crate::dynamics::simulate;
use crate::noise::Recording;
use crate::stats::Proportion;
use crate::{Scalar, StreamId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupPoint {
    pub epsilon: f64,
    pub hits: usize,
    pub n: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub envelope: f64,
    pub dominated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub k: f64,
    pub a_x0: f64,
    pub epsilon_limit: f64,
    pub points: Vec<BlowupPoint>,
    /// Requested horizons refused by `ε ≤ 1/(5 C* K²)`.
    pub skipped: Vec<f64>,
    pub blown_up: usize,
    pub monotone: bool,
}

impl BlowupReport {
    pub fn all_dominated(&self) -> bool {
        self.points.iter().all(|p| p.dominated)
    }
}

/// `P[τ_{2K} < ε]` from cut-off-free paths, compared with the frozen
/// envelope `C e^{−η K²/(4ε)}`. A path counts as a hit when its grid
/// first passage of `2K` happens at or before `ε`.
pub fn blowup_tail_experiment<T: Scalar>(
    model: &Model<T>,
    frozen: &FrozenConstants,
    x0: &[T],
    k: f64,
    epsilons: &[f64],
    n: usize,
    stream: &StreamId,
) -> Result<BlowupReport, LabError> {
    let a_x0 = model.a_norm(x0);
    if a_x0 > k {
        return Err(invalid("k", format!("|Ax0| = {a_x0} exceeds K = {k}")));
    }
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let limit = frozen.epsilon_limit(k);
    let (valid, skipped): (Vec<f64>, Vec<f64>) = epsilons.iter().partition(|e| **e <= limit);
    let steps: Vec<usize> = valid.iter().map(|e| model.steps(*e)).collect::<Result<_, _>>()?;
    let horizon = steps.iter().copied().max().unwrap_or(0);
    let passages = map_paths(n, stream, |_, s| {
        let f = model.forcing(horizon, s);
        let traj = simulate(&model.basis, x0, &f, None, &Recording::Final);
        let hit = traj.first_passage(2.0 * k);
        match (hit, traj.blow_up) {
            (Some(step), _) => (Some(step), traj.blown_up()),
            (None, Some(t)) => (Some(model.steps(t).unwrap_or(horizon)), true),
            (None, None) => (None, false),
        }
    });
    let points: Vec<BlowupPoint> = valid
        .iter()
        .zip(&steps)
        .map(|(&epsilon, &limit_step)| {
            let hits = passages
                .iter()
                .filter(|p| p.0.is_some_and(|s| s <= limit_step))
                .count();
            let p = Proportion::new(hits, n);
            let envelope = frozen.blowup_envelope(k, epsilon);
            BlowupPoint {
                epsilon,
                hits,
                n,
                p_hat: p.p_hat,
                ci_lo: p.ci_lo,
                ci_hi: p.ci_hi,
                envelope,
                dominated: p.p_hat <= envelope,
            }
        })
        .collect();
    let mut sorted = points.clone();
    sorted.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let monotone = sorted.windows(2).all(|w| w[0].hits <= w[1].hits);
    Ok(BlowupReport {
        k,
        a_x0,
        epsilon_limit: limit,
        points,
        skipped,
        blown_up: passages.iter().filter(|p| p.1).count(),
        monotone,
    })
}
