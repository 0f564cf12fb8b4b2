use serde::{Deserialize, Serialize};

use super::{invalid, map_paths, EventSpec, LabError, Model};
use crate::dynamics::{simulate, CutoffSpec};
use crate::noise::Recording;
use crate::stats::MeanEstimate;
use crate::{Scalar, StreamId};

/// Both sides of `|P_ε ψ(x) − P_ε^{(R)} ψ(x)| ≤ 2 P_x[τ_R < ε] ‖ψ‖∞` for an
/// indicator `ψ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfrontoReport {
    pub epsilon: f64,
    pub radius: f64,
    pub n: usize,
    pub p_uncut: f64,
    pub p_cut: f64,
    /// `|P̂_ε ψ − P̂_ε^{(R)} ψ|` on common random numbers.
    pub lhs: f64,
    pub lhs_se: f64,
    pub p_stop: f64,
    /// `2 P̂[τ_R < ε]`.
    pub rhs: f64,
    pub rhs_se: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    /// `lhs ≤ rhs + 3·sqrt(se_l² + se_r²)`.
    pub holds: bool,
    /// Paths whose cut and uncut grid values were bit-identical at `ε`.
    pub identical_paths: usize,
    /// Left side with the cut-off dynamics on an independent stream.
    pub lhs_independent: f64,
    pub lhs_independent_se: f64,
    pub blown_up: usize,
}

pub fn confronto_check<T: Scalar>(
    model: &Model<T>,
    x0: &[T],
    epsilon: f64,
    cutoff: &CutoffSpec,
    event: &EventSpec,
    n: usize,
    stream: &StreamId,
) -> Result<ConfrontoReport, LabError> {
    if n < 2 {
        return Err(invalid("n", "must be at least 2"));
    }
    let steps = model.steps(epsilon)?;
    let independent = stream.named("independent");
    let rows = map_paths(n, stream, |i, s| {
        let f = model.forcing(steps, s);
        let uncut = simulate(&model.basis, x0, &f, None, &Recording::Final);
        let cut = simulate(&model.basis, x0, &f, Some(cutoff), &Recording::Final);
        let f_ind = model.forcing(steps, &independent.child(i as u64));
        let cut_ind = simulate(&model.basis, x0, &f_ind, Some(cutoff), &Recording::Final);
        let ind = |t: &crate::dynamics::Trajectory<T>| {
            if t.blown_up() {
                0.0
            } else {
                f64::from(u8::from(event.contains(&model.basis, t.final_state().expect("kept"))))
            }
        };
        let stopped = uncut.blown_up() || uncut.first_passage(cutoff.radius).is_some_and(|k| k < steps);
        (
            ind(&uncut),
            ind(&cut),
            ind(&cut_ind),
            f64::from(u8::from(stopped)),
            uncut.final_state() == cut.final_state(),
            uncut.blown_up(),
        )
    });
    let col = |f: &dyn Fn(&(f64, f64, f64, f64, bool, bool)) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    let uncut = MeanEstimate::from_samples(&col(&|r| r.0));
    let cut = MeanEstimate::from_samples(&col(&|r| r.1));
    let diff = MeanEstimate::from_samples(&col(&|r| r.0 - r.1));
    let stop = MeanEstimate::from_samples(&col(&|r| r.3));
    let cut_ind = MeanEstimate::from_samples(&col(&|r| r.2));
    let lhs = diff.mean.abs();
    let rhs = 2.0 * stop.mean;
    let rhs_se = 2.0 * stop.std_error;
    let combined = (diff.std_error.powi(2) + rhs_se.powi(2)).sqrt();
    Ok(ConfrontoReport {
        epsilon,
        radius: cutoff.radius,
        n,
        p_uncut: uncut.mean,
        p_cut: cut.mean,
        lhs,
        lhs_se: diff.std_error,
        p_stop: stop.mean,
        rhs,
        rhs_se,
        slack: rhs - lhs,
        holds: lhs <= rhs + 3.0 * combined,
        identical_paths: rows.iter().filter(|r| r.4).count(),
        lhs_independent: (uncut.mean - cut_ind.mean).abs(),
        lhs_independent_se: (uncut.std_error.powi(2) + cut_ind.std_error.powi(2)).sqrt(),
        blown_up: rows.iter().filter(|r| r.5).count(),
    })
}
