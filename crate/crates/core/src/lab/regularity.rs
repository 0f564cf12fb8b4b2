use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{invalid, map_paths, FrozenConstants, LabError, Model};
use crate::dynamics::{check_local_regularity, LocalBoundReport, LocalVerdict};
use crate::rng::standard_normal;
use crate::{Scalar, StreamId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetBoundReport {
    pub attempted: usize,
    /// Cases meeting both hypotheses.
    pub admissible: usize,
    pub passed: usize,
    pub riccati_held: usize,
    pub cases: Vec<LocalBoundReport>,
}

impl DetBoundReport {
    pub fn all_pass(&self) -> bool {
        self.admissible > 0 && self.passed == self.admissible && self.riccati_held == self.admissible
    }
}

/// Draws random `(x0, w, K, ε)` until `cases` of them satisfy
/// `ε ≤ 1/(5 C* K²)` and `θ_ε² ≤ K²/4`, then checks `sup |Au| < 2K` and the
/// Riccati envelope on each. `K` is log-uniform on `k_range`, `|Ax0| = K`
/// in a Gaussian direction, `w` is the noise path scaled by a uniform factor
/// in `[0, w_scale_max]`, and `ε` is uniform on the grid up to `max_epsilon`.
pub fn det_bound_experiment<T: Scalar>(
    model: &Model<T>,
    frozen: &FrozenConstants,
    cases: usize,
    k_range: (f64, f64),
    w_scale_max: f64,
    max_epsilon: f64,
    stream: &StreamId,
) -> Result<DetBoundReport, LabError> {
    if cases == 0 {
        return Err(invalid("cases", "must be at least 1"));
    }
    if !(k_range.0 > 0.0 && k_range.1 >= k_range.0) {
        return Err(invalid("k_range", "needs 0 < lo <= hi"));
    }
    let max_steps = model.steps(max_epsilon)?.max(1);
    let attempts = 20 * cases;
    let run = |s: &StreamId| {
        let mut rng = s.named("draw").rng();
        let k = k_range.0 * (k_range.1 / k_range.0).powf(rng.random::<f64>());
        let dir: Vec<T> = (0..model.modes()).map(|_| T::of(standard_normal(&mut rng))).collect();
        let x0 = model.with_a_norm(&dir, k * (1.0 - 1e-12));
        let steps = rng.random_range(1..=max_steps);
        let scale = w_scale_max * rng.random::<f64>();
        let f = model.forcing(steps, s).scaled(T::of(scale));
        check_local_regularity(&model.basis, &x0, &f, k, frozen.c_star_hat)
    };
    // Batches keep the draw order fixed while stopping early.
    let mut all = Vec::new();
    let batch = cases.max(16);
    let mut next = 0;
    while next < attempts && all.iter().filter(|r: &&LocalBoundReport| r.verdict != LocalVerdict::HypothesesViolated).count() < cases {
        let n = batch.min(attempts - next);
        let offset = next as u64;
        all.extend(map_paths(n, &stream.named("batch").child(offset), |i, _| {
            run(&stream.child(offset + i as u64))
        }));
        next += n;
    }
    let mut admissible_cases: Vec<LocalBoundReport> = all
        .iter()
        .filter(|r| r.verdict != LocalVerdict::HypothesesViolated)
        .cloned()
        .collect();
    admissible_cases.truncate(cases);
    Ok(DetBoundReport {
        attempted: all.len(),
        admissible: admissible_cases.len(),
        passed: admissible_cases.iter().filter(|r| r.verdict == LocalVerdict::Pass).count(),
        riccati_held: admissible_cases.iter().filter(|r| r.riccati_holds).count(),
        cases: admissible_cases,
    })
}
