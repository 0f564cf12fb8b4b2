use serde::{Deserialize, Serialize};

use crate::stats::{linear_fit, Proportion};

/// Bins with fewer exceedances are reported but left out of the fit.
pub const MIN_EXCEEDANCES: usize = 5;

/// Thresholds below this are outside the range the tail bound speaks to.
pub const JUDGED_FROM: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBin {
    pub epsilon: f64,
    pub k: f64,
    pub n_exceed: usize,
    pub n_total: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub used_in_fit: bool,
    /// `k ≥ 1/2`.
    pub judged: bool,
    /// Envelope value at this bin, if a fit exists.
    pub fit_value: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailStatus {
    Fitted,
    /// Every exceedance probability is zero: only an upper bound is known.
    VacuousUpperBound,
    /// Fewer than two usable bins.
    Insufficient,
}

/// Least-squares fit of `log P[Θ_ε ≥ K] = log C − η K²/ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub status: TailStatus,
    pub epsilons: Vec<f64>,
    pub bins: Vec<TailBin>,
    pub eta_hat: Option<f64>,
    /// Prefactor from the regression intercept.
    pub c_hat: Option<f64>,
    /// Smallest prefactor with which `C e^{−η̂K²/ε}` lies on or above every
    /// fitted bin estimate; at least `c_hat`.
    pub c_envelope: Option<f64>,
    pub r_squared: Option<f64>,
    pub residuals: Vec<f64>,
}

impl TailFit {
    /// `c_envelope · e^{−η̂ k²/ε}`.
    pub fn envelope(&self, k: f64, epsilon: f64) -> Option<f64> {
        Some(self.c_envelope? * (-self.eta_hat? * k * k / epsilon).exp())
    }
}

fn bins_for(epsilon: f64, theta: &[f64], k_grid: &[f64]) -> Vec<TailBin> {
    let n = theta.len();
    k_grid
        .iter()
        .map(|&k| {
            let n_exceed = theta.iter().filter(|t| **t >= k).count();
            let p = Proportion::new(n_exceed, n);
            TailBin {
                epsilon,
                k,
                n_exceed,
                n_total: n,
                p_hat: p.p_hat,
                ci_lo: p.ci_lo,
                ci_hi: p.ci_hi,
                used_in_fit: n_exceed >= MIN_EXCEEDANCES && n_exceed < n,
                judged: k >= JUDGED_FROM,
                fit_value: None,
            }
        })
        .collect()
}

/// Empirical `P[Θ_ε ≥ K]` per threshold with exact intervals and the tail fit.
pub fn fit_exponential_tail(theta: &[f64], epsilon: f64, k_grid: &[f64]) -> TailFit {
    fit_joint_tail(&[(epsilon, theta, k_grid)])
}

/// One fit over several horizons, regressing on `K²/ε` jointly.
pub fn fit_joint_tail(groups: &[(f64, &[f64], &[f64])]) -> TailFit {
    let mut bins: Vec<TailBin> = groups
        .iter()
        .flat_map(|(eps, theta, ks)| bins_for(*eps, theta, ks))
        .collect();
    let epsilons = groups.iter().map(|g| g.0).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = bins
        .iter()
        .filter(|b| b.used_in_fit)
        .map(|b| (b.k * b.k / b.epsilon, b.p_hat.ln()))
        .unzip();

    let empty = |status| TailFit {
        status,
        epsilons: groups.iter().map(|g| g.0).collect(),
        bins: bins.clone(),
        eta_hat: None,
        c_hat: None,
        c_envelope: None,
        r_squared: None,
        residuals: Vec::new(),
    };
    if bins.iter().all(|b| b.n_exceed == 0) {
        return empty(TailStatus::VacuousUpperBound);
    }
    let fit = match linear_fit(&x, &y) {
        Some(f) if f.slope < 0.0 => f,
        _ => return empty(TailStatus::Insufficient),
    };
    let eta = -fit.slope;
    let c_hat = fit.intercept.exp();
    let c_envelope = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| (yi + eta * xi).exp())
        .fold(c_hat, f64::max);
    for b in &mut bins {
        b.fit_value = Some(c_envelope * (-eta * b.k * b.k / b.epsilon).exp());
    }
    TailFit {
        status: TailStatus::Fitted,
        epsilons,
        bins,
        eta_hat: Some(eta),
        c_hat: Some(c_hat),
        c_envelope: Some(c_envelope),
        r_squared: Some(fit.r_squared),
        residuals: fit.residuals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_is_vacuous() {
        let fit = fit_exponential_tail(&[0.1; 100], 0.01, &[1.0, 2.0]);
        assert_eq!(fit.status, TailStatus::VacuousUpperBound);
        assert!(fit.eta_hat.is_none());
    }

    #[test]
    fn threshold_below_samples_has_probability_one() {
        let fit = fit_exponential_tail(&[0.3, 0.4, 0.5], 0.01, &[0.1]);
        assert_eq!(fit.bins[0].p_hat, 1.0);
        assert!(!fit.bins[0].used_in_fit);
    }

    #[test]
    fn envelope_dominates_fitted_bins() {
        // Θ = sqrt(ε E / 2) with E ~ Exp(1) has P[Θ ≥ K] = exp(-2K²/ε).
        let eps = 0.02;
        let n = 20_000;
        let theta: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                (eps * -u.ln() / 2.0).sqrt()
            })
            .collect();
        let ks: Vec<f64> = (1..12).map(|j| 0.02 * j as f64).collect();
        let fit = fit_exponential_tail(&theta, eps, &ks);
        assert!((fit.eta_hat.unwrap() - 2.0).abs() < 0.05);
        for b in fit.bins.iter().filter(|b| b.used_in_fit) {
            assert!(b.fit_value.unwrap() >= b.p_hat * (1.0 - 1e-12));
        }
    }
}
