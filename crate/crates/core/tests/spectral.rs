use proptest::prelude::*;
use rand::Rng;
use snslab_core::spectral::{bilinear_b, norm, NormKind, PhysicalGrid, SpectralField, StokesBasis};
use snslab_core::{Basis, Basis32, StreamId};

fn random_field(basis: &Basis, rng: &mut impl Rng) -> SpectralField<f64> {
    let c = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    SpectralField::from_coefficients(basis, c).unwrap()
}

#[test]
fn mode_counts() {
    assert_eq!(Basis::new(1.0, 1).unwrap().len(), 52);
    assert_eq!(Basis::new(1.0, 2).unwrap().len(), 248);
}

#[test]
fn transport_matches_physical_space_at_cutoff_two() {
    let basis = Basis::new(1.0, 2).unwrap();
    let grid = PhysicalGrid::exact_for_triple_products(&basis);
    let mut rng = StreamId::root(11).rng();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let u = random_field(&basis, &mut rng);
        let v = random_field(&basis, &mut rng);
        let spectral = bilinear_b(&basis, &u, &v).unwrap();
        let physical = grid.transport(u.coefficients(), v.coefficients());
        let err: f64 = spectral
            .coefficients()
            .iter()
            .zip(&physical)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale: f64 = physical.iter().map(|b| b * b).sum::<f64>().sqrt();
        worst = worst.max(err / scale);
    }
    assert!(worst <= 1e-8, "relative error {worst}");
}

#[test]
fn stokes_pairing_is_the_v_norm() {
    let basis = Basis::new(2.5, 1).unwrap();
    let mut rng = StreamId::root(12).rng();
    for _ in 0..100 {
        let u = random_field(&basis, &mut rng);
        let au = snslab_core::spectral::apply_spectral_power(&basis, &u, 1.0).unwrap();
        let lhs = au.inner(&u).unwrap();
        let v = norm(&basis, &u, NormKind::V).unwrap();
        assert!((lhs - v * v).abs() <= 1e-12 * lhs);
    }
}

#[test]
fn single_precision_basis_agrees() {
    let b64 = Basis::new(1.0, 1).unwrap();
    let b32 = Basis32::new(1.0, 1).unwrap();
    let c64: Vec<f64> = (0..b64.len()).map(|i| ((i * 31 % 17) as f64 - 8.0) / 8.0).collect();
    let c32: Vec<f32> = c64.iter().map(|c| *c as f32).collect();
    let u64 = SpectralField::from_coefficients(&b64, c64).unwrap();
    let u32 = SpectralField::from_coefficients(&b32, c32).unwrap();
    let b = bilinear_b(&b64, &u64, &u64).unwrap();
    let b_single = bilinear_b(&b32, &u32, &u32).unwrap();
    let scale = b.coefficients().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (x, y) in b.coefficients().iter().zip(b_single.coefficients()) {
        assert!((x - f64::from(*y)).abs() <= 1e-4 * scale);
    }
}

fn field_strategy(modes: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, modes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_conserves_energy(c in field_strategy(52)) {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let u = SpectralField::from_coefficients(&basis, c).unwrap();
        let b = bilinear_b(&basis, &u, &u).unwrap();
        let flux = b.inner(&u).unwrap();
        let scale = b.inner(&b).unwrap().sqrt() * u.inner(&u).unwrap().sqrt();
        prop_assert!(flux.abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn transport_is_bilinear(a in field_strategy(52), b in field_strategy(52), w in field_strategy(52), s in -3.0f64..3.0) {
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let (a, b, w) = (
            SpectralField::from_coefficients(&basis, a).unwrap(),
            SpectralField::from_coefficients(&basis, b).unwrap(),
            SpectralField::from_coefficients(&basis, w).unwrap(),
        );
        let lhs = bilinear_b(&basis, &a.axpy(s, &b).unwrap(), &w).unwrap();
        let rhs = bilinear_b(&basis, &a, &w).unwrap().axpy(s, &bilinear_b(&basis, &b, &w).unwrap()).unwrap();
        let scale = rhs.inner(&rhs).unwrap().sqrt().max(1.0);
        let diff = lhs.sub(&rhs).unwrap();
        prop_assert!(diff.inner(&diff).unwrap().sqrt() <= 1e-11 * scale);
    }

    #[test]
    fn norms_are_ordered_by_the_first_eigenvalue(c in field_strategy(52)) {
        // |Au| ≥ λ₁^{1/2} ‖u‖_V ≥ λ₁ |u|
        let basis = StokesBasis::<f64>::new(1.0, 1).unwrap();
        let u = SpectralField::from_coefficients(&basis, c).unwrap();
        let l1 = basis.eigenvalue(0);
        let (h, v, a) = (
            norm(&basis, &u, NormKind::H).unwrap(),
            norm(&basis, &u, NormKind::V).unwrap(),
            norm(&basis, &u, NormKind::DA).unwrap(),
        );
        prop_assert!(a >= l1.sqrt() * v * (1.0 - 1e-12));
        prop_assert!(v >= l1.sqrt() * h * (1.0 - 1e-12));
    }
}
