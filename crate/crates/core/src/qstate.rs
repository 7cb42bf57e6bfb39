//! Two-qubit density matrices and their local Bloch / correlation-tensor form.
//!
//! Basis order is `|00⟩, |01⟩, |10⟩, |11⟩` with the first factor belonging to
//! Alice. Pauli index 0, 1, 2 stands for X, Y, Z. All entropies are in bits.

use nalgebra::{Complex, Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("Bloch parameters do not describe a physical state (min eigenvalue {0:e})")]
    NotAState(f64),
}

pub type Result<T> = std::result::Result<T, StateError>;

const fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Pauli matrix for axis `k` (0 = X, 1 = Y, 2 = Z).
pub fn pauli(k: usize) -> Mat2 {
    match k {
        0 => Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        1 => Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        2 => Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
        _ => panic!("pauli axis must be 0, 1 or 2, got {k}"),
    }
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

fn trace_real4(m: &Mat4) -> f64 {
    (0..4).map(|i| m[(i, i)].re).sum()
}

fn hermitian_part4(m: &Mat4) -> Mat4 {
    (m + m.adjoint()).scale(0.5)
}

fn max_antihermitian4(m: &Mat4) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ascending eigenvalues of a Hermitian 4×4 matrix.
fn hermitian_eigenvalues4(m: &Mat4) -> [f64; 4] {
    let eig = m.symmetric_eigen();
    let mut vals = [0.0; 4];
    vals.copy_from_slice(eig.eigenvalues.as_slice());
    vals.sort_by(|x, y| x.total_cmp(y));
    vals
}

/// Square root of a Hermitian positive semidefinite matrix, clipping tiny
/// negative eigenvalues.
fn sqrt_psd4(m: &Mat4) -> Mat4 {
    let eig = hermitian_part4(m).symmetric_eigen();
    let mut out = Mat4::zeros();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        out += (v * v.adjoint()).scale(lam.max(0.0).sqrt());
    }
    out
}

/// Anything with a density-matrix spectrum.
pub trait Spectrum {
    /// Eigenvalues in ascending order.
    fn eigenvalues(&self) -> Vec<f64>;
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: Mat4,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity, in that order.
    pub fn new(matrix: Mat4) -> Result<Self> {
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        let dev = max_antihermitian4(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(StateError::NotHermitian(dev));
        }
        let tr = trace_real4(&matrix);
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(StateError::BadTrace(tr));
        }
        let matrix = hermitian_part4(&matrix);
        let min = hermitian_eigenvalues4(&matrix)[0];
        if min < -PSD_TOL {
            return Err(StateError::NotPositive(min));
        }
        Ok(Self { matrix })
    }

    /// Nearest state by eigenvalue clipping: Hermitize, zero the negative
    /// eigenvalues and renormalize the trace. Returns the state and whether
    /// any eigenvalue had to be clipped.
    pub fn from_matrix_clipped(matrix: &Mat4) -> Result<(Self, bool)> {
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        let h = hermitian_part4(matrix);
        let eig = h.symmetric_eigen();
        let clipped = eig.eigenvalues.iter().any(|&l| l < 0.0);
        let total: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();
        if total <= 0.0 {
            return Err(StateError::BadTrace(total));
        }
        let mut out = Mat4::zeros();
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam > 0.0 {
                let v = eig.eigenvectors.column(i);
                out += (v * v.adjoint()).scale(lam / total);
            }
        }
        Ok((
            Self {
                matrix: hermitian_part4(&out),
            },
            clipped,
        ))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn from_pure(psi: &Vector4<C64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(StateError::BadTrace(n * n));
        }
        let psi = psi.unscale(n);
        Self::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Mat4::identity().scale(0.25),
        }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn bloch(&self) -> BlochRep {
        to_bloch(self)
    }
}

impl Spectrum for TwoQubitState {
    fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues4(&self.matrix).to_vec()
    }
}

/// A validated single-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    matrix: Mat2,
}

impl QubitState {
    pub fn new(matrix: Mat2) -> Result<Self> {
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        let dev = (matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > HERMITIAN_TOL {
            return Err(StateError::NotHermitian(dev));
        }
        let tr = matrix[(0, 0)].re + matrix[(1, 1)].re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(StateError::BadTrace(tr));
        }
        let q = Self {
            matrix: (matrix + matrix.adjoint()).scale(0.5),
        };
        let min = q.eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(StateError::NotPositive(min));
        }
        Ok(q)
    }

    /// `½(𝟙 + r·σ)`; rejects `‖r‖ > 1 + PSD_TOL`.
    pub fn from_bloch(r: &Vector3<f64>) -> Result<Self> {
        if r.iter().any(|x| !x.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let n = r.norm();
        if n > 1.0 + PSD_TOL {
            return Err(StateError::NotAState(0.5 * (1.0 - n)));
        }
        let mut m = Mat2::identity();
        for k in 0..3 {
            m += pauli(k).scale(r[k]);
        }
        Ok(Self {
            matrix: m.scale(0.5),
        })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Mat2::identity().scale(0.5),
        }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn bloch(&self) -> Vector3<f64> {
        Vector3::from_fn(|k, _| (pauli(k) * self.matrix).trace().re)
    }
}

impl Spectrum for QubitState {
    fn eigenvalues(&self) -> Vec<f64> {
        let r = self.bloch().norm();
        vec![0.5 * (1.0 - r), 0.5 * (1.0 + r)]
    }
}

/// Local Bloch vectors and correlation tensor of a two-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochRep {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub e: Matrix3<f64>,
}

impl BlochRep {
    pub fn new(a: Vector3<f64>, b: Vector3<f64>, e: Matrix3<f64>) -> Self {
        Self { a, b, e }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros(), Matrix3::zeros())
    }

    /// Assembles `¼(𝟙⊗𝟙 + Σ a_k σ_k⊗𝟙 + Σ b_l 𝟙⊗σ_l + Σ E_kl σ_k⊗σ_l)`
    /// without any positivity check.
    pub fn assemble(&self) -> Mat4 {
        let id = Mat2::identity();
        let mut m = Mat4::identity();
        for k in 0..3 {
            m += kron(&pauli(k), &id).scale(self.a[k]);
            m += kron(&id, &pauli(k)).scale(self.b[k]);
            for l in 0..3 {
                m += kron(&pauli(k), &pauli(l)).scale(self.e[(k, l)]);
            }
        }
        m.scale(0.25)
    }
}

pub fn to_bloch(rho: &TwoQubitState) -> BlochRep {
    let id = Mat2::identity();
    let m = rho.matrix();
    let expect = |op: Mat4| (op * m).trace().re;
    let a = Vector3::from_fn(|k, _| expect(kron(&pauli(k), &id)));
    let b = Vector3::from_fn(|l, _| expect(kron(&id, &pauli(l))));
    let e = Matrix3::from_fn(|k, l| expect(kron(&pauli(k), &pauli(l))));
    BlochRep { a, b, e }
}

pub fn from_bloch(rep: &BlochRep) -> Result<TwoQubitState> {
    if rep
        .a
        .iter()
        .chain(rep.b.iter())
        .chain(rep.e.iter())
        .any(|x| !x.is_finite())
    {
        return Err(StateError::NonFinite);
    }
    let m = rep.assemble();
    let min = hermitian_eigenvalues4(&m)[0];
    if min < -PSD_TOL {
        return Err(StateError::NotAState(min));
    }
    Ok(TwoQubitState {
        matrix: hermitian_part4(&m),
    })
}

/// Correlation tensor brought to diagonal form by proper local rotations:
/// `rot_a · E · rot_bᵀ = diag(signs[i] · singular_values[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtForm {
    /// Descending `E₁ ≥ E₂ ≥ E₃ ≥ 0`.
    pub singular_values: [f64; 3],
    pub rot_a: Matrix3<f64>,
    pub rot_b: Matrix3<f64>,
    pub signs: [f64; 3],
}

impl SchmidtForm {
    pub fn diagonal(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::from_fn(|i, _| {
            self.signs[i] * self.singular_values[i]
        }))
    }
}

pub fn schmidt_canonical(e: &Matrix3<f64>) -> SchmidtForm {
    let svd = e.svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v = svd.v_t.expect("svd computed with v_t").transpose();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut u_s =
        Matrix3::from_columns(&[u.column(order[0]), u.column(order[1]), u.column(order[2])]);
    let mut v_s =
        Matrix3::from_columns(&[v.column(order[0]), v.column(order[1]), v.column(order[2])]);
    let mut signs = [1.0; 3];
    // flipping the smallest axis keeps the ordering of the magnitudes
    if u_s.determinant() < 0.0 {
        u_s.column_mut(2).neg_mut();
        signs[2] = -signs[2];
    }
    if v_s.determinant() < 0.0 {
        v_s.column_mut(2).neg_mut();
        signs[2] = -signs[2];
    }
    let singular_values = [
        svd.singular_values[order[0]],
        svd.singular_values[order[1]],
        svd.singular_values[order[2]],
    ];
    SchmidtForm {
        singular_values,
        rot_a: u_s.transpose(),
        rot_b: v_s.transpose(),
        signs,
    }
}

pub fn purity(rho: &TwoQubitState) -> f64 {
    let m = rho.matrix();
    (m * m).trace().re
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn state_fidelity(rho: &TwoQubitState, sigma: &TwoQubitState) -> f64 {
    let s = sqrt_psd4(rho.matrix());
    let inner = hermitian_part4(&(s * sigma.matrix() * s));
    let root_sum: f64 = hermitian_eigenvalues4(&inner)
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    (root_sum * root_sum).clamp(0.0, 1.0)
}

/// Shannon entropy (bits) of a spectrum, after clipping tiny negatives and
/// renormalizing.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    let clipped: Vec<f64> = eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h: f64 = clipped
        .iter()
        .map(|l| l / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    h.max(0.0)
}

pub fn von_neumann_entropy<S: Spectrum + ?Sized>(rho: &S) -> f64 {
    spectrum_entropy(&rho.eigenvalues())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Alice's qubit (the first factor).
    A,
    /// Bob's qubit.
    B,
}

/// Reduced state on `keep`, tracing out the other qubit.
pub fn partial_trace(rho: &TwoQubitState, keep: Side) -> QubitState {
    let m = rho.matrix();
    let reduced = match keep {
        Side::A => Mat2::from_fn(|i, j| m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)]),
        Side::B => Mat2::from_fn(|i, j| m[(i, j)] + m[(2 + i, 2 + j)]),
    };
    QubitState {
        matrix: (reduced + reduced.adjoint()).scale(0.5),
    }
}

/// `I(A:B) = H(A) + H(B) − H(AB)` in bits.
pub fn mutual_information(rho: &TwoQubitState) -> f64 {
    let ha = von_neumann_entropy(&partial_trace(rho, Side::A));
    let hb = von_neumann_entropy(&partial_trace(rho, Side::B));
    (ha + hb - von_neumann_entropy(rho)).max(0.0)
}

/// Wootters concurrence. With `ρ = W W†` (columns `√λ_i v_i`), the square
/// roots of the eigenvalues of `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)` are the singular
/// values of `Wᵀ (σ_y⊗σ_y) W`. Taking them from an SVD keeps roundoff in
/// null directions from being amplified by a square root.
pub fn concurrence(rho: &TwoQubitState) -> f64 {
    let yy = kron(&pauli(1), &pauli(1));
    let eig = hermitian_part4(rho.matrix()).symmetric_eigen();
    let mut w = eig.eigenvectors;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        w.column_mut(i).scale_mut(lam.max(0.0).sqrt());
    }
    let tau = w.transpose() * yy * w;
    let mut mu: Vec<f64> = tau.singular_values().iter().copied().collect();
    mu.sort_by(|x, y| y.total_cmp(x));
    (mu[0] - mu[1] - mu[2] - mu[3]).max(0.0)
}

/// `exp(−i θ n·σ / 2)`: rotates Bloch vectors by `angle` about `axis`.
pub fn rotation_unitary(axis: &Vector3<f64>, angle: f64) -> Mat2 {
    let n = axis.normalize();
    let (s, co) = (0.5 * angle).sin_cos();
    let mut gen = Mat2::zeros();
    for k in 0..3 {
        gen += pauli(k).scale(n[k]);
    }
    Mat2::identity().scale(co) - gen * c(0.0, s)
}

/// SO(3) matrix matching [`rotation_unitary`].
pub fn rotation_matrix(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    *nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), angle).matrix()
}

/// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`.
pub fn apply_local_unitaries(rho: &TwoQubitState, ua: &Mat2, ub: &Mat2) -> TwoQubitState {
    let u = kron(ua, ub);
    TwoQubitState {
        matrix: hermitian_part4(&(u * rho.matrix() * u.adjoint())),
    }
}
