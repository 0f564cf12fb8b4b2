use rand::Rng;
use snslab_core::noise::{
    fit_exponential_tail, noise_coefficients, ou_mode_variance, ou_second_moment_oracle, sample_wiener,
    simulate_stokes_ou, NoiseForcing, Recording, TailStatus,
};
use snslab_core::stats::{ks_normal, MeanEstimate};
use snslab_core::{Basis, StreamId};

#[test]
fn wiener_increments_have_variance_dt() {
    let basis = Basis::new(1.0, 1).unwrap();
    let path = sample_wiener(&basis, 2000, 1e-3, &StreamId::root(1));
    let xs: Vec<f64> = (0..2000).map(|n| path.increment(n, 3) / 1e-3f64.sqrt()).collect();
    let (_, p) = ks_normal(&xs, 0.0, 1.0);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn same_stream_same_path() {
    let basis = Basis::new(1.0, 1).unwrap();
    let a = sample_wiener(&basis, 10, 1e-3, &StreamId::root(5).child(2));
    let b = sample_wiener(&basis, 10, 1e-3, &StreamId::root(5).child(2));
    let c = sample_wiener(&basis, 10, 1e-3, &StreamId::root(5).child(3));
    assert_eq!(a.increments, b.increments);
    assert_ne!(a.increments, c.increments);
}

#[test]
fn one_step_matches_mode_variance_for_any_step() {
    // The convolution is exact in law, so one large step has the oracle variance.
    let basis = Basis::new(1.0, 1).unwrap();
    let noise = noise_coefficients(&basis);
    let (t, mode) = (0.3, 7);
    let samples: Vec<f64> = (0..20_000u64)
        .map(|i| {
            let p = sample_wiener(&basis, 1, t, &StreamId::root(2).child(i));
            let f = NoiseForcing::from_wiener(&basis, &noise, 1.0, &p);
            simulate_stokes_ou(&basis, &f, &Recording::Final).states[0].1[mode]
        })
        .collect();
    let var = ou_mode_variance(basis.eigenvalue(mode), noise.sigmas[mode], 1.0, t);
    let (_, p) = ks_normal(&samples, 0.0, var.sqrt());
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn ou_second_moment_within_three_se() {
    let basis = Basis::new(4.0, 1).unwrap();
    let noise = noise_coefficients(&basis);
    let t = 0.05;
    let x: Vec<f64> = (0..4000u64)
        .map(|i| {
            let p = sample_wiener(&basis, 50, 1e-3, &StreamId::root(3).child(i));
            let f = NoiseForcing::from_wiener(&basis, &noise, 1.0, &p);
            simulate_stokes_ou(&basis, &f, &Recording::Final).a_norm.last().unwrap().powi(2)
        })
        .collect();
    let est = MeanEstimate::from_samples(&x);
    let oracle = ou_second_moment_oracle(&basis, &noise, 1.0, t);
    assert!((est.mean - oracle).abs() <= 3.0 * est.std_error, "{est:?} vs {oracle}");
}

#[test]
fn synthetic_tail_recovers_eta() {
    // P[Θ ≥ K] = exp(-η K²/ε) exactly for Θ = sqrt(ε E/η), E ~ Exp(1).
    let (eta, eps) = (0.8, 0.01);
    let mut rng = StreamId::root(4).rng();
    let theta: Vec<f64> = (0..20_000)
        .map(|_| {
            let u: f64 = rng.random();
            (eps * -(1.0 - u).ln() / eta).sqrt()
        })
        .collect();
    let ks: Vec<f64> = (0..12).map(|j| 0.05 + 0.02 * j as f64).collect();
    let fit = fit_exponential_tail(&theta, eps, &ks);
    assert_eq!(fit.status, TailStatus::Fitted);
    let got = fit.eta_hat.unwrap();
    assert!((got - eta).abs() <= 0.1 * eta, "eta {got}");
    assert!(fit.r_squared.unwrap() > 0.99);
}

#[test]
fn insufficient_tail_is_reported() {
    let fit = fit_exponential_tail(&[0.1, 0.2, 0.3], 0.01, &[5.0, 6.0]);
    assert_eq!(fit.status, TailStatus::VacuousUpperBound);
}
