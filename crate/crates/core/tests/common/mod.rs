#![allow(dead_code)]

use discord_rsp::qstate::{
    from_bloch, kron, pauli, rotation_matrix, rotation_unitary, BlochRep, Mat2, Mat4, TwoQubitState,
};
use discord_rsp::states::{
    random_bloch_vector, random_qubit_state, random_rotation, random_state, random_unit_vector,
    zero_discord,
};
use nalgebra::{Matrix3, Vector3};
use rand::Rng;

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A random local rotation as the qubit unitary and its SO(3) image.
pub fn random_local_rotation<R: Rng + ?Sized>(rng: &mut R) -> (Mat2, Matrix3<f64>) {
    let (axis, angle) = random_rotation(rng);
    (
        rotation_unitary(&axis, angle),
        rotation_matrix(&axis, angle),
    )
}

/// Concurrence from the square roots of the eigenvalues of the non-Hermitian
/// product `ρ ρ̃`, `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn wootters_concurrence(rho: &TwoQubitState) -> f64 {
    let yy = kron(&pauli(1), &pauli(1));
    let m = rho.matrix();
    let tilde = yy * m.map(|z| z.conj()) * yy;
    let product = m * tilde;
    let eig = product.eigenvalues().expect("complex Schur converges");
    let mut l: Vec<f64> = eig.iter().map(|z| z.re.max(0.0).sqrt()).collect();
    l.sort_by(|x, y| y.total_cmp(x));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

fn sample_physical<R: Rng + ?Sized>(
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> BlochRep,
) -> TwoQubitState {
    loop {
        if let Ok(rho) = from_bloch(&draw(rng)) {
            return rho;
        }
    }
}

/// `a = b = 0`, `E = O_A diag(c) O_Bᵀ` with `c` uniform over the physical tetrahedron.
pub fn maximally_mixed_marginal_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    sample_physical(rng, |rng| {
        let c = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let (_, oa) = random_local_rotation(rng);
        let (_, ob) = random_local_rotation(rng);
        BlochRep::new(
            Vector3::zeros(),
            Vector3::zeros(),
            oa * Matrix3::from_diagonal(&c) * ob.transpose(),
        )
    })
}

/// `E = λ O` for a rotation `O`, with arbitrary local vectors.
pub fn isotropic_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    sample_physical(rng, |rng| {
        let lambda = rng.random_range(-1.0..1.0);
        let (_, o) = random_local_rotation(rng);
        BlochRep::new(
            random_bloch_vector(rng),
            random_bloch_vector(rng),
            o * lambda,
        )
    })
}

/// Rank-one correlations `E = c v wᵀ` with arbitrary local vectors; RSP
/// fidelity vanishes while discord generally does not.
pub fn rank_one_correlation_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    sample_physical(rng, |rng| {
        let c = rng.random_range(-1.0..1.0);
        let e = random_unit_vector(rng) * random_unit_vector(rng).transpose() * c;
        BlochRep::new(
            random_bloch_vector(rng) * 0.5,
            random_bloch_vector(rng) * 0.5,
            e,
        )
    })
}

pub fn zero_discord_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let p = rng.random::<f64>();
    let v = random_unit_vector(rng);
    let (r1, r2) = (random_qubit_state(rng), random_qubit_state(rng));
    zero_discord(p, &v, &r1, &r2).expect("valid parameters")
}

/// Seeded random state with rank cycling through 1..=4.
pub fn ranked_state(seed: u64) -> TwoQubitState {
    random_state(seed, 1 + (seed % 4) as usize).expect("valid rank")
}
