use serde::{Deserialize, Serialize};

use super::{invalid, map_paths, EventSpec, FrozenConstants, LabError, Model};
use crate::dynamics::simulate;
use crate::noise::Recording;
use crate::stats::{MeanEstimate, Z95};
use crate::{Scalar, StreamId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLipPoint {
    pub a_h: f64,
    pub diff: f64,
    pub se: f64,
    pub ci: (f64, f64),
    /// Horizon from the selection rule, on the grid.
    pub epsilon_used: f64,
    /// `(1 + |Ax0|⁶)|Ah| log(1/|Ah|) / (t ∧ 1)`.
    pub shape: f64,
    pub ratio: f64,
    /// The 95% interval of the difference contains 0.
    pub resolution_limited: bool,
    /// `C_T · shape`, once `C_T` is fitted.
    pub envelope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLipReport {
    pub t: f64,
    pub n: usize,
    pub a_x0: f64,
    pub k: f64,
    pub points: Vec<LogLipPoint>,
    /// Smallest constant whose envelope dominates every resolved point.
    pub c_t: Option<f64>,
    pub blown_up: usize,
}

/// `ε = min(η K²/(4 log(1/|Ah|)), t/2, 1/(5 C* K²))`, rounded down to the
/// grid and kept at least one step.
pub fn epsilon_rule(frozen: &FrozenConstants, k: f64, a_h: f64, t: f64, dt: f64) -> f64 {
    let log_term = (1.0 / a_h).ln();
    let first = if log_term > 0.0 {
        frozen.tail_eta_hat * k * k / (4.0 * log_term)
    } else {
        f64::INFINITY
    };
    let eps = first.min(t / 2.0).min(frozen.epsilon_limit(k));
    ((eps / dt).floor().max(1.0)) * dt
}

/// `|P̂(t, x0 + h, Γ) − P̂(t, x0, Γ)|` on common random numbers for each
/// `|Ah|` in `scales`, `h` along `direction`.
#[allow(clippy::too_many_arguments)]
pub fn loglip_experiment<T: Scalar>(
    model: &Model<T>,
    frozen: &FrozenConstants,
    t: f64,
    x0: &[T],
    direction: &[T],
    scales: &[f64],
    event: &EventSpec,
    n: usize,
    stream: &StreamId,
) -> Result<LogLipReport, LabError> {
    if n < 2 {
        return Err(invalid("n", "must be at least 2"));
    }
    if scales.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(invalid("h_scales", "every |Ah| must lie in [0, 1]"));
    }
    if model.a_norm(direction) == 0.0 {
        return Err(invalid("h_direction", "must be non-zero"));
    }
    let steps = model.steps(t)?;
    let a_x0 = model.a_norm(x0);
    let k = a_x0 + 1.0;
    let starts: Vec<Vec<T>> = scales
        .iter()
        .map(|s| {
            let h = model.with_a_norm(direction, *s);
            x0.iter().zip(&h).map(|(a, b)| *a + *b).collect()
        })
        .collect();
    let rows = map_paths(n, stream, |_, s| {
        let f = model.forcing(steps, s);
        let mut blown = 0usize;
        let mut ind = |x: &[T]| {
            let traj = simulate(&model.basis, x, &f, None, &Recording::Final);
            if traj.blown_up() {
                blown += 1;
                return 0.0;
            }
            f64::from(u8::from(event.contains(&model.basis, traj.final_state().expect("kept"))))
        };
        let base = ind(x0);
        let diffs: Vec<f64> = starts.iter().map(|x| ind(x) - base).collect();
        (diffs, blown)
    });
    let mut points: Vec<LogLipPoint> = scales
        .iter()
        .enumerate()
        .map(|(j, &a_h)| {
            let est = MeanEstimate::from_samples(&rows.iter().map(|r| r.0[j]).collect::<Vec<_>>());
            let diff = est.mean.abs();
            let half = Z95 * est.std_error;
            let shape = if a_h > 0.0 && a_h < 1.0 {
                (1.0 + a_x0.powi(6)) * a_h * (1.0 / a_h).ln() / t.min(1.0)
            } else {
                0.0
            };
            LogLipPoint {
                a_h,
                diff,
                se: est.std_error,
                ci: ((diff - half).max(0.0), diff + half),
                epsilon_used: epsilon_rule(frozen, k, a_h, t, model.dt.as_f64()),
                shape,
                ratio: if shape > 0.0 { diff / shape } else { 0.0 },
                resolution_limited: diff <= half,
                envelope: None,
            }
        })
        .collect();
    let c_t = points
        .iter()
        .filter(|p| !p.resolution_limited && p.shape > 0.0)
        .map(|p| p.ratio)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    if let Some(c) = c_t {
        for p in &mut points {
            p.envelope = Some(c * p.shape);
        }
    }
    Ok(LogLipReport {
        t,
        n,
        a_x0,
        k,
        points,
        c_t,
        blown_up: rows.iter().map(|r| r.1).sum(),
    })
}
