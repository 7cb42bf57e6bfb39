//! Geometric quantum discord with measurement on Alice's qubit.
//!
//! The closed form works on the Bloch representation through the symmetric
//! matrix `K = a aᵀ + E Eᵀ`. The oracle is a direct numerical minimization of
//! the squared Hilbert–Schmidt distance to classical-quantum states and shares
//! no code with the closed form beyond the state type.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::qstate::{
    kron, pauli, schmidt_canonical, to_bloch, BlochRep, Mat2, Mat4, TwoQubitState,
};
use crate::stream_rng;

/// Two singular values closer than this count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Maximum angle between `a` and the top eigenspace of `E Eᵀ`.
pub const PARALLEL_TOL_RAD: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscordError {
    #[error("state is outside the class where the discord reduces to ½(E₂²+E₃²) (angle to top eigenspace {angle:e} rad)")]
    NotInSpecialClass { angle: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscordReport {
    /// Normalized `D²` in `[0, 1]`.
    pub value: f64,
    /// Largest eigenvalue of `K = a aᵀ + E Eᵀ`.
    pub k_max: f64,
    pub special_class: bool,
    /// Component of `a` along the top left-singular direction of `E`, when
    /// `special_class` holds.
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialClass {
    pub member: bool,
    pub kappa: Option<f64>,
    /// Angle between `a` and its projection onto the top eigenspace of `E Eᵀ`.
    pub angle: f64,
}

pub fn geometric_discord(rho: &TwoQubitState) -> DiscordReport {
    geometric_discord_bloch(&to_bloch(rho))
}

pub fn geometric_discord_bloch(rep: &BlochRep) -> DiscordReport {
    let k = rep.a * rep.a.transpose() + rep.e * rep.e.transpose();
    let k_max = k.symmetric_eigen().eigenvalues.max();
    let raw = 0.5 * (rep.a.norm_squared() + rep.e.norm_squared() - k_max);
    let class = check_special_class_bloch(rep);
    DiscordReport {
        value: raw.max(0.0),
        k_max,
        special_class: class.member,
        kappa: class.kappa,
    }
}

pub fn check_special_class(rho: &TwoQubitState) -> SpecialClass {
    check_special_class_bloch(&to_bloch(rho))
}

/// Membership in the class where `k_max = E₁² + κ²`: `a` lies in the top
/// eigenspace of `E Eᵀ`. This covers `a = 0` and isotropic `E` (every vector
/// is then in the top eigenspace).
pub fn check_special_class_bloch(rep: &BlochRep) -> SpecialClass {
    let a_norm = rep.a.norm();
    if a_norm <= 1e-12 {
        return SpecialClass {
            member: true,
            kappa: Some(0.0),
            angle: 0.0,
        };
    }
    let eig = (rep.e * rep.e.transpose()).symmetric_eigen();
    let sv: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    let top = sv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let top_idx: Vec<usize> = (0..3).filter(|&i| top - sv[i] <= DEGENERACY_TOL).collect();

    let mut proj = Vector3::zeros();
    for &i in &top_idx {
        let u = eig.eigenvectors.column(i);
        proj += u * u.dot(&rep.a);
    }
    let angle = (rep.a - proj).norm().atan2(proj.norm());
    let member = angle <= PARALLEL_TOL_RAD;
    let kappa = member.then(|| {
        if top_idx.len() == 1 {
            rep.a.dot(&eig.eigenvectors.column(top_idx[0]))
        } else {
            a_norm
        }
    });
    SpecialClass {
        member,
        kappa,
        angle,
    }
}

/// `½(E₂² + E₃²)` from the Schmidt form; only valid inside the special class.
pub fn discord_special_form(rho: &TwoQubitState) -> Result<f64, DiscordError> {
    discord_special_form_bloch(&to_bloch(rho))
}

pub fn discord_special_form_bloch(rep: &BlochRep) -> Result<f64, DiscordError> {
    let class = check_special_class_bloch(rep);
    if !class.member {
        return Err(DiscordError::NotInSpecialClass { angle: class.angle });
    }
    let sv = schmidt_canonical(&rep.e).singular_values;
    Ok(0.5 * (sv[1] * sv[1] + sv[2] * sv[2]))
}

pub fn is_zero_discord(rho: &TwoQubitState, tol: f64) -> bool {
    geometric_discord(rho).value <= tol
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub max_evals: usize,
    /// Search stops once every coordinate step is below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_evals: 2000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

const ORACLE_DIM: usize = 9;

fn bloch_matrix(r: &Vector3<f64>) -> Mat2 {
    let mut m = Mat2::identity();
    for k in 0..3 {
        m += pauli(k).scale(r[k]);
    }
    m.scale(0.5)
}

fn spherical(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

/// Point of the Bloch ball with radius `sin u` and direction `(θ, φ)`.
fn ball_point(x: &[f64]) -> Vector3<f64> {
    spherical(x[1], x[2]) * x[0].sin()
}

/// Classical-quantum state for a raw parameter vector
/// `[p, θ, φ, r₁(3), r₂(3)]`: `p` enters as `½(1 + sin p)`, Alice's axis in
/// spherical angles, Bob's Bloch vectors through [`ball_point`]. Every
/// coordinate is unconstrained and the map is smooth.
fn classical_state(x: &[f64; ORACLE_DIM]) -> Mat4 {
    let p = 0.5 * (1.0 + x[0].sin());
    let v = spherical(x[1], x[2]);
    let r1 = ball_point(&x[3..6]);
    let r2 = ball_point(&x[6..9]);
    kron(&bloch_matrix(&v), &bloch_matrix(&r1)).scale(p)
        + kron(&bloch_matrix(&-v), &bloch_matrix(&r2)).scale(1.0 - p)
}

fn hs_objective(rho: &Mat4, x: &[f64; ORACLE_DIM]) -> f64 {
    let d = rho - classical_state(x);
    2.0 * d.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Hooke–Jeeves pattern search with per-coordinate adaptive steps.
struct PatternSearch<'a> {
    rho: &'a Mat4,
    evals: usize,
    max_evals: usize,
}

impl PatternSearch<'_> {
    fn eval(&mut self, x: &[f64; ORACLE_DIM]) -> f64 {
        self.evals += 1;
        hs_objective(self.rho, x)
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.max_evals
    }

    /// One exploratory sweep around `x`; grows the step of every coordinate
    /// that improved and halves the others.
    fn explore(
        &mut self,
        x: &mut [f64; ORACLE_DIM],
        fx: &mut f64,
        steps: &mut [f64; ORACLE_DIM],
    ) -> bool {
        let mut improved = false;
        for i in 0..ORACLE_DIM {
            let mut moved = false;
            for dir in [1.0, -1.0] {
                let mut trial = *x;
                trial[i] += dir * steps[i];
                let ft = self.eval(&trial);
                if ft < *fx {
                    *x = trial;
                    *fx = ft;
                    moved = true;
                    break;
                }
            }
            if moved {
                steps[i] *= 1.5;
                improved = true;
            } else {
                steps[i] *= 0.5;
            }
        }
        improved
    }

    fn run(&mut self, start: [f64; ORACLE_DIM], tol: f64) -> f64 {
        let mut base = start;
        let mut f_base = self.eval(&base);
        let mut steps = [0.25; ORACLE_DIM];
        while !self.exhausted() && steps.iter().any(|&s| s >= tol) {
            let mut x = base;
            let mut fx = f_base;
            if !self.explore(&mut x, &mut fx, &mut steps) {
                continue;
            }
            // pattern moves along the last successful displacement
            loop {
                let mut jump = [0.0; ORACLE_DIM];
                for i in 0..ORACLE_DIM {
                    jump[i] = 2.0 * x[i] - base[i];
                }
                base = x;
                f_base = fx;
                if self.exhausted() {
                    break;
                }
                let mut fj = self.eval(&jump);
                let mut probe_steps = steps;
                self.explore(&mut jump, &mut fj, &mut probe_steps);
                if fj < f_base {
                    x = jump;
                    fx = fj;
                } else {
                    break;
                }
            }
        }
        f_base
    }
}

/// Upper bound on `D² = 2 min_χ Tr(ρ−χ)²` found by multi-start pattern
/// search over classical-quantum states. Restart `i` draws its start from the
/// stream `(seed, i)`; the minimum over restarts does not depend on order.
pub fn geometric_discord_oracle(rho: &TwoQubitState, config: &OracleConfig) -> f64 {
    let restarts = config.restarts.max(1);
    let m = *rho.matrix();
    (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(config.seed, i as u64);
            let mut angles = || {
                let d = crate::states::random_unit_vector(&mut rng);
                (d.z.clamp(-1.0, 1.0).acos(), d.y.atan2(d.x))
            };
            let (t0, f0) = angles();
            let (t1, f1) = angles();
            let (t2, f2) = angles();
            let mut start = [0.0, t0, f0, 0.0, t1, f1, 0.0, t2, f2];
            for i in [0, 3, 6] {
                start[i] = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
            }
            PatternSearch {
                rho: &m,
                evals: 0,
                max_evals: config.max_evals,
            }
            .run(start, config.tol)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// `K = a aᵀ + E Eᵀ`, exposed for diagnostics.
pub fn k_matrix(rep: &BlochRep) -> Matrix3<f64> {
    rep.a * rep.a.transpose() + rep.e * rep.e.transpose()
}
