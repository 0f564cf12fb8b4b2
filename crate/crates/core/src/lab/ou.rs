use serde::{Deserialize, Serialize};

use super::{invalid, map_paths, LabError, Model};
use crate::noise::{fit_exponential_tail, ou_mode_variance, ou_second_moment_oracle, simulate_stokes_ou, Recording, TailFit};
use crate::stats::{ks_normal, quantile, MeanEstimate};
use crate::{Scalar, StreamId};

/// `count` evenly spaced thresholds between the `lo` and `hi` empirical
/// quantiles of `samples`.
pub fn quantile_grid(samples: &[f64], lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (a, b) = (quantile(&sorted, lo), quantile(&sorted, hi));
    if count <= 1 {
        return vec![a];
    }
    (0..count)
        .map(|j| a + (b - a) * j as f64 / (count - 1) as f64)
        .collect()
}

/// `Θ_ε` over `n` OU paths.
pub(crate) fn theta_samples<T: Scalar>(model: &Model<T>, epsilon: f64, n: usize, stream: &StreamId) -> Result<Vec<f64>, LabError> {
    let steps = model.steps(epsilon)?;
    if steps == 0 {
        return Err(invalid("epsilon", "must be at least one time step"));
    }
    Ok(map_paths(n, stream, |_, s| {
        let f = model.forcing(steps, s);
        *simulate_stokes_ou(&model.basis, &f, &Recording::Final)
            .theta
            .last()
            .expect("theta series is never empty")
    }))
}

/// Tail of `Θ_ε` over `k_grid`, or over 12 thresholds between the median
/// and the 99.9% quantile when `k_grid` is empty.
pub fn ou_tail_experiment<T: Scalar>(
    model: &Model<T>,
    epsilon: f64,
    k_grid: &[f64],
    n: usize,
    stream: &StreamId,
) -> Result<(TailFit, Vec<f64>), LabError> {
    let theta = theta_samples(model, epsilon, n, stream)?;
    let ks = if k_grid.is_empty() {
        quantile_grid(&theta, 0.5, 0.999, 12)
    } else {
        k_grid.to_vec()
    };
    Ok((fit_exponential_tail(&theta, epsilon, &ks), theta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuModeCheck {
    pub t: f64,
    pub mode: usize,
    pub variance: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuMomentReport {
    pub t: f64,
    pub n: usize,
    pub empirical: MeanEstimate,
    pub oracle: f64,
    /// `(empirical − oracle) / SE`.
    pub z: f64,
    pub modes: Vec<OuModeCheck>,
}

/// `E|AZ(t)|²` against the closed form, plus per-mode KS tests.
pub fn ou_moment_check<T: Scalar>(
    model: &Model<T>,
    times: &[f64],
    modes: &[usize],
    n: usize,
    stream: &StreamId,
) -> Result<Vec<OuMomentReport>, LabError> {
    for m in modes {
        if *m >= model.modes() {
            return Err(invalid("modes", format!("mode {m} out of range")));
        }
    }
    let mut reports = Vec::new();
    for (j, &t) in times.iter().enumerate() {
        let steps = model.steps(t)?;
        let samples = map_paths(n, &stream.child(j as u64), |_, s| {
            let f = model.forcing(steps, s);
            let ou = simulate_stokes_ou(&model.basis, &f, &Recording::Final);
            let z = ou.states[0].1.iter().map(|c| c.as_f64()).collect::<Vec<_>>();
            (ou.a_norm[steps].powi(2), modes.iter().map(|m| z[*m]).collect::<Vec<_>>())
        });
        let sq: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let empirical = MeanEstimate::from_samples(&sq);
        let oracle = ou_second_moment_oracle(&model.basis, &model.noise, model.nu.as_f64(), t);
        let mode_checks = modes
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let variance = ou_mode_variance(
                    model.basis.eigenvalue(m).as_f64(),
                    model.noise.sigmas[m].as_f64(),
                    model.nu.as_f64(),
                    t,
                );
                let xs: Vec<f64> = samples.iter().map(|s| s.1[k]).collect();
                let (d, p) = ks_normal(&xs, 0.0, variance.sqrt());
                OuModeCheck {
                    t,
                    mode: m,
                    variance,
                    ks_statistic: d,
                    ks_p_value: p,
                }
            })
            .collect();
        reports.push(OuMomentReport {
            t,
            n,
            z: (empirical.mean - oracle) / empirical.std_error,
            empirical,
            oracle,
            modes: mode_checks,
        });
    }
    Ok(reports)
}
