use serde::{Deserialize, Serialize};

use super::{invalid, map_paths, EventSpec, LabError, Model};
use crate::dynamics::{simulate, CutoffSpec};
use crate::noise::Recording;
use crate::stats::Proportion;
use crate::{Scalar, StreamId};

/// Monte Carlo estimate of `P(t, x, Γ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub t: f64,
    pub event: EventSpec,
    pub n: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub ci: (f64, f64),
    pub cutoff_used: Option<f64>,
    /// Overflowed paths; each counts as outside `Γ`.
    pub blown_up: usize,
}

impl KernelEstimate {
    pub(crate) fn from_hits(t: f64, event: EventSpec, hits: usize, n: usize, cutoff: Option<f64>, blown_up: usize) -> Self {
        let p = Proportion::new(hits, n);
        Self {
            t,
            event,
            n,
            hits,
            p_hat: p.p_hat,
            ci: (p.ci_lo, p.ci_hi),
            cutoff_used: cutoff,
            blown_up,
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.n as f64).sqrt()
    }
}

/// Fraction of `n` independent paths from `x` that lie in `Γ` at time `t`.
pub fn estimate_kernel<T: Scalar>(
    model: &Model<T>,
    t: f64,
    x: &[T],
    event: &EventSpec,
    n: usize,
    cutoff: Option<&CutoffSpec>,
    stream: &StreamId,
) -> Result<KernelEstimate, LabError> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let steps = model.steps(t)?;
    let outcomes = map_paths(n, stream, |_, s| {
        let f = model.forcing(steps, s);
        let traj = simulate(&model.basis, x, &f, cutoff, &Recording::Final);
        if traj.blown_up() {
            (false, true)
        } else {
            (event.contains(&model.basis, traj.final_state().expect("final state kept")), false)
        }
    });
    let hits = outcomes.iter().filter(|o| o.0).count();
    let blown = outcomes.iter().filter(|o| o.1).count();
    Ok(KernelEstimate::from_hits(
        t,
        event.clone(),
        hits,
        n,
        cutoff.map(|c| c.radius),
        blown,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_events() {
        let model = Model::<f64>::new(1.0, 1, 1.0, 1e-3).unwrap();
        let x = model.zeros();
        let full = estimate_kernel(&model, 0.01, &x, &EventSpec::Full, 50, None, &StreamId::root(1)).unwrap();
        let empty = estimate_kernel(&model, 0.01, &x, &EventSpec::Empty, 50, None, &StreamId::root(1)).unwrap();
        assert_eq!(full.p_hat, 1.0);
        assert_eq!(empty.p_hat, 0.0);
    }

    #[test]
    fn off_grid_time_is_rejected() {
        let model = Model::<f64>::new(1.0, 1, 1.0, 1e-3).unwrap();
        let r = estimate_kernel(&model, 0.0105, &model.zeros(), &EventSpec::Full, 5, None, &StreamId::root(1));
        assert!(r.is_err());
    }
}
