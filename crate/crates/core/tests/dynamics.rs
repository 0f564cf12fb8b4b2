use snslab_core::dynamics::{
    check_local_regularity, martingale_residual, simulate, simulate_tangent, solve_deterministic, CutoffSpec,
    LocalVerdict,
};
use snslab_core::noise::{noise_coefficients, sample_wiener, NoiseForcing, Recording};
use snslab_core::{Basis, StreamId};

fn setup(l: f64, steps: usize, seed: u64) -> (Basis, NoiseForcing<f64>) {
    let basis = Basis::new(l, 1).unwrap();
    let noise = noise_coefficients(&basis);
    let path = sample_wiener(&basis, steps, 1e-3, &StreamId::root(seed));
    let f = NoiseForcing::from_wiener(&basis, &noise, 1.0, &path);
    (basis, f)
}

fn start(basis: &Basis, a: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..basis.len()).map(|i| ((i * 7 % 13) as f64 - 6.0) / 6.0).collect();
    let s = raw.iter().zip(basis.eigenvalues()).map(|(c, l)| (c * l).powi(2)).sum::<f64>().sqrt();
    raw.iter().map(|c| c * a / s).collect()
}

#[test]
fn cutoff_far_above_the_path_changes_nothing() {
    let (basis, f) = setup(4.0, 200, 1);
    let x0 = start(&basis, 1.0);
    let free = simulate(&basis, &x0, &f, None, &Recording::All);
    let cut = simulate(&basis, &x0, &f, Some(&CutoffSpec::new(1e6)), &Recording::All);
    assert_eq!(free.states, cut.states);
}

#[test]
fn vanishing_cutoff_leaves_the_stokes_ou_process() {
    let (basis, f) = setup(4.0, 100, 2);
    let x0 = start(&basis, 10.0);
    let cut = simulate(&basis, &x0, &f, Some(&CutoffSpec::new(1.0)), &Recording::Final);
    let mut z = x0.clone();
    for n in 0..100 {
        for i in 0..basis.len() {
            z[i] = f.decay[i] * z[i] + f.conv_step(n)[i];
        }
    }
    let last = cut.final_state().unwrap();
    for (a, b) in last.iter().zip(&z) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn deterministic_splitting_reassembles_the_path() {
    let (basis, f) = setup(4.0, 100, 3);
    let x0 = start(&basis, 1.0);
    let sol = solve_deterministic(&basis, &x0, &f, &Recording::Final);
    let direct = simulate(&basis, &x0, &f, None, &Recording::Final);
    let (a, b) = (sol.u.a_norm.last().unwrap(), direct.a_norm.last().unwrap());
    assert!((a - b).abs() <= 1e-12 * b);
}

#[test]
fn small_start_is_locally_regular() {
    let (basis, f) = setup(4.0, 20, 4);
    let x0 = start(&basis, 0.5);
    let r = check_local_regularity(&basis, &x0, &f, 1.5, 5e-4);
    assert_ne!(r.verdict, LocalVerdict::HypothesesViolated);
    assert_eq!(r.verdict, LocalVerdict::Pass);
    assert!(r.riccati_holds);
    assert!(r.sup_a < 3.0);
}

#[test]
fn tangent_matches_forward_difference() {
    let (basis, f) = setup(4.0, 50, 5);
    let noise = noise_coefficients(&basis);
    let x0 = start(&basis, 1.0);
    let h = start(&basis, 0.3);
    let cutoff = CutoffSpec::new(1.2);
    let tan = simulate_tangent(&basis, &noise, &x0, &h, &cutoff, &f, &Recording::Final);
    let delta = 1e-6;
    let xp: Vec<f64> = x0.iter().zip(&h).map(|(a, b)| a + delta * b).collect();
    let up = simulate(&basis, &xp, &f, Some(&cutoff), &Recording::Final);
    let u0 = tan.base.final_state().unwrap();
    let d = &tan.states.last().unwrap().1;
    for ((p, q), g) in up.final_state().unwrap().iter().zip(u0).zip(d) {
        assert!(((p - q) / delta - g).abs() <= 1e-5 * g.abs().max(1e-3));
    }
}

#[test]
fn martingale_has_zero_mean_and_predicted_variation() {
    let basis = Basis::new(4.0, 1).unwrap();
    let noise = noise_coefficients(&basis);
    let x0 = start(&basis, 1.0);
    let ensemble: Vec<_> = (0..400u64)
        .map(|i| {
            let p = sample_wiener(&basis, 100, 1e-3, &StreamId::root(6).child(i));
            let f = NoiseForcing::from_wiener(&basis, &noise, 1.0, &p);
            simulate(&basis, &x0, &f, None, &Recording::All)
        })
        .collect();
    let mut phi = vec![0.0; basis.len()];
    phi[0] = 1.0;
    let r = martingale_residual(&basis, &noise, &ensemble, &phi, 0.1).unwrap();
    assert!(r.mean_residual.mean.abs() <= 3.0 * r.mean_residual.std_error);
    assert!((0.9..=1.1).contains(&r.qv_ratio), "{}", r.qv_ratio);
}
