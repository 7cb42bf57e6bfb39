mod common;

use common::{max_abs_diff, random_local_rotation, ranked_state, wootters_concurrence};
use discord_rsp::qstate::{
    apply_local_unitaries, concurrence, from_bloch, kron, mutual_information, pauli, purity,
    schmidt_canonical, to_bloch, von_neumann_entropy, TwoQubitState,
};
use discord_rsp::states::{random_state, werner};
use discord_rsp::stream_rng;
use nalgebra::{Complex, Matrix3, SymmetricEigen, Vector4};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bloch_round_trip(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_state(seed, rank).unwrap();
        let back = from_bloch(&to_bloch(&rho)).unwrap();
        prop_assert!(max_abs_diff(back.matrix(), rho.matrix()) <= 1e-10);
    }

    #[test]
    fn local_rotations_act_covariantly(seed in any::<u64>()) {
        let rho = ranked_state(seed);
        let mut rng = stream_rng(seed, 1);
        let (ua, oa) = random_local_rotation(&mut rng);
        let (ub, ob) = random_local_rotation(&mut rng);
        let rotated = apply_local_unitaries(&rho, &ua, &ub);
        let (r, r2) = (to_bloch(&rho), to_bloch(&rotated));
        prop_assert!((r2.a - oa * r.a).amax() <= 1e-9);
        prop_assert!((r2.b - ob * r.b).amax() <= 1e-9);
        prop_assert!((r2.e - oa * r.e * ob.transpose()).amax() <= 1e-9);

        prop_assert!((purity(&rotated) - purity(&rho)).abs() <= 1e-9);
        prop_assert!((von_neumann_entropy(&rotated) - von_neumann_entropy(&rho)).abs() <= 1e-9);
        prop_assert!((mutual_information(&rotated) - mutual_information(&rho)).abs() <= 1e-9);
        prop_assert!((concurrence(&rotated) - concurrence(&rho)).abs() <= 1e-9);
        let (s1, s2) = (schmidt_canonical(&r.e).singular_values, schmidt_canonical(&r2.e).singular_values);
        for i in 0..3 {
            prop_assert!((s1[i] - s2[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn schmidt_values_are_root_eigenvalues(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let e = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let form = schmidt_canonical(&e);
        let mut roots: Vec<f64> = SymmetricEigen::new(e.transpose() * e).eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        roots.sort_by(|x, y| y.total_cmp(x));
        for (sv, root) in form.singular_values.iter().zip(&roots) {
            prop_assert!((sv - root).abs() <= 1e-9);
        }
        // the rotations diagonalize E
        prop_assert!((form.rot_a * e * form.rot_b.transpose() - form.diagonal()).amax() <= 1e-9);
        prop_assert!((form.rot_a.determinant() - 1.0).abs() <= 1e-9);
        prop_assert!((form.rot_b.determinant() - 1.0).abs() <= 1e-9);
    }

    // the oracle takes square roots of near-zero non-Hermitian eigenvalues,
    // which limits it to about 1e-7 on rank-deficient states
    #[test]
    fn concurrence_matches_spin_flip_spectrum(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_state(seed, rank).unwrap();
        prop_assert!((concurrence(&rho) - wootters_concurrence(&rho)).abs() <= 1e-6);
    }

    #[test]
    fn pure_state_concurrence_is_spin_flip_overlap(parts in prop::array::uniform8(-1.0f64..1.0)) {
        let psi = Vector4::from_fn(|i, _| Complex::new(parts[2 * i], parts[2 * i + 1]));
        prop_assume!(psi.norm() > 1e-3);
        let psi = psi.normalize();
        let rho = TwoQubitState::from_pure(&psi).unwrap();
        let yy = kron(&pauli(1), &pauli(1));
        let overlap = (psi.adjoint() * yy * psi.map(|z| z.conj()))[(0, 0)].norm();
        prop_assert!((concurrence(&rho) - overlap).abs() <= 1e-12);
    }
}

#[test]
fn werner_concurrence_on_a_grid() {
    for i in 0..50 {
        let lambda = i as f64 / 49.0;
        let rho = werner(lambda).unwrap();
        let expected = ((3.0 * lambda - 1.0) / 2.0).max(0.0);
        assert!(
            (concurrence(&rho) - expected).abs() <= 1e-9,
            "lambda {lambda}"
        );
        assert!(
            (wootters_concurrence(&rho) - expected).abs() <= 1e-9,
            "lambda {lambda}"
        );
    }
}

#[test]
fn measures_on_extremes() {
    let mixed = TwoQubitState::maximally_mixed();
    assert!((von_neumann_entropy(&mixed) - 2.0).abs() < 1e-12);
    assert!(mutual_information(&mixed).abs() < 1e-12);
    let singlet = werner(1.0).unwrap();
    assert!(von_neumann_entropy(&singlet).abs() < 1e-9);
    assert!((mutual_information(&singlet) - 2.0).abs() < 1e-9);
}
