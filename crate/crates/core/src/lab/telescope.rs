use serde::{Deserialize, Serialize};

use super::{invalid, map_paths, EventSpec, FrozenConstants, LabError, Model};
use crate::dynamics::{simulate, CutoffSpec, Trajectory};
use crate::noise::Recording;
use crate::stats::{MeanEstimate, Proportion};
use crate::{Scalar, StreamId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelescopePoint {
    pub pieces: usize,
    /// `4N·C·e^{−η N/t}`.
    pub tail_term: f64,
    /// `2 Σ_k P̂_A(t − kt/N, x, |Au| > (N/t)^{1/2})`.
    pub exceedance_term: f64,
    pub bound: f64,
    /// `|P̂_A − P̂_B| ≤ bound + 3·SE`.
    pub dominated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelescopeReport {
    pub t: f64,
    pub n: usize,
    /// `None` is the dynamics without cut-off.
    pub radius_a: Option<f64>,
    pub radius_b: Option<f64>,
    pub p_a: Proportion,
    pub p_b: Proportion,
    /// `P̂_A − P̂_B` on common noise.
    pub diff: MeanEstimate,
    pub points: Vec<TelescopePoint>,
    pub blown_up: usize,
}

impl TelescopeReport {
    pub fn all_dominated(&self) -> bool {
        self.points.iter().all(|p| p.dominated)
    }

    /// The 95% interval of the difference contains 0.
    pub fn diff_covers_zero(&self) -> bool {
        let (lo, hi) = self.diff.interval(crate::stats::Z95);
        lo <= 0.0 && 0.0 <= hi
    }
}

fn inside<T: Scalar>(model: &Model<T>, event: &EventSpec, traj: &Trajectory<T>) -> bool {
    !traj.blown_up() && event.contains(&model.basis, traj.final_state().expect("kept"))
}

/// Bounds `|P_A(t, x, Γ) − P_B(t, x, Γ)|` for two cut-off radii by splitting
/// `[0, t]` into `N` pieces. Intermediate times are rounded to the nearest
/// grid step; a blown-up path counts as exceeding every level.
#[allow(clippy::too_many_arguments)]
pub fn telescoping_compare<T: Scalar>(
    model: &Model<T>,
    frozen: &FrozenConstants,
    t: f64,
    x0: &[T],
    event: &EventSpec,
    radius_a: Option<f64>,
    radius_b: Option<f64>,
    pieces: &[usize],
    n: usize,
    stream: &StreamId,
) -> Result<TelescopeReport, LabError> {
    if n < 2 {
        return Err(invalid("n", "must be at least 2"));
    }
    if pieces.iter().any(|p| *p == 0) {
        return Err(invalid("pieces", "every N must be positive"));
    }
    for r in [radius_a, radius_b].into_iter().flatten() {
        if !(r > 0.0) {
            return Err(invalid("radius", "must be positive"));
        }
    }
    let steps = model.steps(t)?;
    let (cut_a, cut_b) = (radius_a.map(CutoffSpec::new), radius_b.map(CutoffSpec::new));
    let rows = map_paths(n, stream, |_, s| {
        let f = model.forcing(steps, s);
        let a = simulate(&model.basis, x0, &f, cut_a.as_ref(), &Recording::Final);
        let b = if radius_a == radius_b {
            None
        } else {
            Some(simulate(&model.basis, x0, &f, cut_b.as_ref(), &Recording::Final))
        };
        let in_a = inside(model, event, &a);
        let in_b = b.as_ref().map_or(in_a, |b| inside(model, event, b));
        let blown = usize::from(a.blown_up()) + b.as_ref().map_or(0, |b| usize::from(b.blown_up()));
        (in_a, in_b, a.a_norm, blown)
    });
    let count = |f: &dyn Fn(&(bool, bool, Vec<f64>, usize)) -> bool| rows.iter().filter(|r| f(r)).count();
    let p_a = Proportion::new(count(&|r| r.0), n);
    let p_b = Proportion::new(count(&|r| r.1), n);
    let diff = MeanEstimate::from_samples(
        &rows
            .iter()
            .map(|r| f64::from(u8::from(r.0)) - f64::from(u8::from(r.1)))
            .collect::<Vec<_>>(),
    );
    let points = pieces
        .iter()
        .map(|&np| {
            let nf = np as f64;
            let level = (nf / t).sqrt();
            let tail_term = 4.0 * nf * frozen.tail_c_envelope * (-frozen.tail_eta_hat * nf / t).exp();
            let exceedance_term = 2.0
                * (1..=np)
                    .map(|k| {
                        let idx = ((steps * (np - k)) as f64 / nf).round() as usize;
                        rows.iter()
                            .filter(|r| r.2.get(idx).is_none_or(|a| *a > level))
                            .count() as f64
                            / n as f64
                    })
                    .sum::<f64>();
            let bound = tail_term + exceedance_term;
            TelescopePoint {
                pieces: np,
                tail_term,
                exceedance_term,
                bound,
                dominated: diff.mean.abs() <= bound + 3.0 * diff.std_error,
            }
        })
        .collect();
    Ok(TelescopeReport {
        t,
        n,
        radius_a,
        radius_b,
        p_a,
        p_b,
        diff,
        points,
        blown_up: rows.iter().map(|r| r.3).sum(),
    })
}
