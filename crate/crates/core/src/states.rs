//! Factories for the state families used by the protocol and for seeded
//! random ensembles.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, Matrix4, Vector3, Vector4};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use thiserror::Error;

use crate::qstate::{kron, pauli, Mat2, QubitState, StateError, TwoQubitState, C64};
use crate::stream_rng;

/// Tolerance below zero still accepted for a mixture weight.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatesError {
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid weights: component {component} has weight {weight}")]
    InvalidWeights {
        component: &'static str,
        weight: f64,
    },
    #[error("direction is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("mixture has no components")]
    EmptyMixture,
    #[error("mixture weight {0} is negative")]
    NegativeWeight(f64),
    #[error("mixture weights sum to zero")]
    ZeroTotalWeight,
    #[error(transparent)]
    State(#[from] StateError),
}

pub type Result<T> = std::result::Result<T, StatesError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PsiPlus,
        BellKind::PsiMinus,
        BellKind::PhiPlus,
        BellKind::PhiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PsiPlus => "psi_plus",
            BellKind::PsiMinus => "psi_minus",
            BellKind::PhiPlus => "phi_plus",
            BellKind::PhiMinus => "phi_minus",
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "psi_plus" => Ok(BellKind::PsiPlus),
            "psi_minus" => Ok(BellKind::PsiMinus),
            "phi_plus" => Ok(BellKind::PhiPlus),
            "phi_minus" => Ok(BellKind::PhiMinus),
            _ => Err(format!(
                "unknown Bell state '{s}' (expected psi_plus, psi_minus, phi_plus or phi_minus)"
            )),
        }
    }
}

fn re(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

/// `|ψ±⟩ = (|10⟩ ± |01⟩)/√2`, `|φ±⟩ = (|00⟩ ± |11⟩)/√2`.
pub fn bell(kind: BellKind) -> TwoQubitState {
    let h = FRAC_1_SQRT_2;
    let psi = match kind {
        BellKind::PsiPlus => Vector4::new(re(0.0), re(h), re(h), re(0.0)),
        BellKind::PsiMinus => Vector4::new(re(0.0), re(-h), re(h), re(0.0)),
        BellKind::PhiPlus => Vector4::new(re(h), re(0.0), re(0.0), re(h)),
        BellKind::PhiMinus => Vector4::new(re(h), re(0.0), re(0.0), re(-h)),
    };
    TwoQubitState::from_pure(&psi).expect("Bell vectors are normalized")
}

/// Computational basis product state `|ij⟩`.
pub fn product_basis(i: usize, j: usize) -> TwoQubitState {
    let mut m = Matrix4::zeros();
    m[(2 * i + j, 2 * i + j)] = re(1.0);
    TwoQubitState::new(m).expect("basis projector is a state")
}

/// Singlet mixed with white noise, `λ|ψ⁻⟩⟨ψ⁻| + (1−λ)𝟙/4`.
pub fn werner(lambda: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(StatesError::OutOfRange {
            name: "lambda",
            value: lambda,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let m = bell(BellKind::PsiMinus).matrix().scale(lambda)
        + Matrix4::identity().scale(0.25 * (1.0 - lambda));
    Ok(TwoQubitState::new(m)?)
}

/// Weighted components of the isotropic family with `a = b = t ẑ` and
/// `E = −k 𝟙`, in the order ψ⁺, ψ⁻, |11⟩, |00⟩.
///
/// With σ₃|0⟩ = +|0⟩ the component carrying weight `(1−2t−k)/4` is `|11⟩`;
/// that is what puts the local Bloch vectors at `+t ẑ`.
pub fn rho_b_components(k: f64, t: f64) -> Result<Vec<(f64, TwoQubitState)>> {
    let parts = [
        ("psi_plus", (1.0 - k) / 4.0, bell(BellKind::PsiPlus)),
        ("psi_minus", (1.0 + 3.0 * k) / 4.0, bell(BellKind::PsiMinus)),
        ("|11>", (1.0 - 2.0 * t - k) / 4.0, product_basis(1, 1)),
        ("|00>", (1.0 + 2.0 * t - k) / 4.0, product_basis(0, 0)),
    ];
    let mut out = Vec::with_capacity(4);
    for (component, weight, state) in parts {
        if !weight.is_finite() || weight < -WEIGHT_TOL {
            return Err(StatesError::InvalidWeights { component, weight });
        }
        out.push((weight.max(0.0), state));
    }
    Ok(out)
}

pub fn rho_b(k: f64, t: f64) -> Result<TwoQubitState> {
    let components = rho_b_components(k, t)?;
    let m = components
        .iter()
        .fold(Matrix4::zeros(), |acc, (w, s)| acc + s.matrix().scale(*w));
    Ok(TwoQubitState::new(m)?)
}

/// Werner state as a weighted mixture of the four Bell states: the singlet
/// carries `λ + (1−λ)/4`, the others `(1−λ)/4` each.
pub fn werner_components(lambda: f64) -> Result<Vec<(f64, TwoQubitState)>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(StatesError::OutOfRange {
            name: "lambda",
            value: lambda,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(BellKind::ALL
        .iter()
        .map(|&kind| {
            let w = if kind == BellKind::PsiMinus {
                lambda + 0.25 * (1.0 - lambda)
            } else {
                0.25 * (1.0 - lambda)
            };
            (w, bell(kind))
        })
        .collect())
}

fn projector(v: &Vector3<f64>, sign: f64) -> Mat2 {
    let mut m = Mat2::identity();
    for k in 0..3 {
        m += pauli(k).scale(sign * v[k]);
    }
    m.scale(0.5)
}

/// Classical-quantum state `p Π₊ᵥ⊗ρ₁ + (1−p) Π₋ᵥ⊗ρ₂`, where `Π±ᵥ` project
/// Alice's qubit onto the `±v` Bloch directions.
pub fn zero_discord(
    p: f64,
    v: &Vector3<f64>,
    rho1: &QubitState,
    rho2: &QubitState,
) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StatesError::OutOfRange {
            name: "p",
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let n = v.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(StatesError::NotUnit(n));
    }
    let m = kron(&projector(v, 1.0), rho1.matrix()).scale(p)
        + kron(&projector(v, -1.0), rho2.matrix()).scale(1.0 - p);
    Ok(TwoQubitState::new(m)?)
}

/// Convex combination of states.
#[derive(Debug, Clone, Default)]
pub struct MixtureSpec {
    pub components: Vec<(f64, TwoQubitState)>,
}

impl MixtureSpec {
    pub fn new(components: Vec<(f64, TwoQubitState)>) -> Self {
        Self { components }
    }
}

pub fn mix(spec: &MixtureSpec) -> Result<TwoQubitState> {
    if spec.components.is_empty() {
        return Err(StatesError::EmptyMixture);
    }
    if let Some(&(w, _)) = spec.components.iter().find(|(w, _)| w.is_nan() || *w < 0.0) {
        return Err(StatesError::NegativeWeight(w));
    }
    let total: f64 = spec.components.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return Err(StatesError::ZeroTotalWeight);
    }
    let m = spec
        .components
        .iter()
        .fold(Matrix4::zeros(), |acc, (w, s)| {
            acc + s.matrix().scale(w / total)
        });
    Ok(TwoQubitState::new(m)?)
}

/// Haar-distributed 4×4 unitary (QR of a complex Ginibre matrix with the
/// phases of R's diagonal divided out).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<C64> {
    let g = Matrix4::from_fn(|_, _| {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        Complex::new(x, y)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = Matrix4::from_diagonal(&Vector4::from_fn(|i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / re(d.norm())
        } else {
            re(1.0)
        }
    }));
    q * phases
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Uniform point in the Bloch ball.
pub fn random_bloch_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let r: f64 = rng.random::<f64>().cbrt();
    random_unit_vector(rng) * r
}

pub fn random_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> QubitState {
    QubitState::from_bloch(&random_bloch_vector(rng)).expect("point lies inside the Bloch ball")
}

/// Random axis and angle in `[0, π]`.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> (Vector3<f64>, f64) {
    (
        random_unit_vector(rng),
        rng.random::<f64>() * std::f64::consts::PI,
    )
}

/// State with exactly `rank` nonzero eigenvalues drawn uniformly from the
/// simplex, rotated by a Haar unitary. Deterministic in `seed`.
pub fn random_state(seed: u64, rank: usize) -> Result<TwoQubitState> {
    if !(1..=4).contains(&rank) {
        return Err(StatesError::OutOfRange {
            name: "rank",
            value: rank as f64,
            lo: 1.0,
            hi: 4.0,
        });
    }
    let mut rng = stream_rng(seed, 0);
    let mut spectrum = [0.0; 4];
    for w in spectrum.iter_mut().take(rank) {
        // Exp(1) draws are strictly positive with probability one
        *w = Exp1.sample(&mut rng);
        if *w <= 0.0 {
            *w = f64::MIN_POSITIVE;
        }
    }
    let total: f64 = spectrum.iter().sum();
    let u = haar_unitary(&mut rng);
    let d = Matrix4::from_diagonal(&Vector4::from_fn(|i, _| re(spectrum[i] / total)));
    Ok(TwoQubitState::new(u * d * u.adjoint())?)
}
