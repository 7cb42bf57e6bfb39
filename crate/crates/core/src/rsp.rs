//! Remote state preparation with one classical bit.
//!
//! Alice measures her qubit along `α̂`, sends the outcome `α = ±1`, and Bob
//! rotates his qubit by π about the announced axis `β̂` when `α = −1`. The
//! target `s` lies in the plane orthogonal to `β̂`. Everything here is written
//! in terms of the Bloch representation of the shared state.

use std::io::{self, Write};

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use thiserror::Error;

use crate::qstate::BlochRep;
use crate::{fmt_decimal, stream_rng};

/// Tolerance for unit-norm and orthogonality checks on directions.
pub const DIRECTION_TOL: f64 = 1e-9;
/// Branches with probability at or below this are treated as impossible.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;

pub const SWEEP_CSV_HEADER: &str =
    "target_index,sx,sy,sz,beta_x,beta_y,beta_z,payoff_analytic,payoff_mc,stderr,shots";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RspError {
    #[error("{what} is not a unit vector (norm {norm})")]
    NotUnit { what: &'static str, norm: f64 },
    #[error("target is not orthogonal to beta (s·β = {0:e})")]
    NotOrthogonal(f64),
    #[error("outcome {outcome:?} has probability {probability:e}; conditional state undefined")]
    ZeroProbabilityBranch { outcome: Outcome, probability: f64 },
    #[error("shot count must be at least 1")]
    NoShots,
}

pub type Result<T> = std::result::Result<T, RspError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

fn check_unit(what: &'static str, v: &Vector3<f64>) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > DIRECTION_TOL {
        return Err(RspError::NotUnit { what, norm });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaPolicy {
    Optimal,
    Fixed(Vector3<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    beta: Vector3<f64>,
    target: Vector3<f64>,
    alpha_policy: AlphaPolicy,
}

impl ProtocolConfig {
    pub fn new(
        beta: Vector3<f64>,
        target: Vector3<f64>,
        alpha_policy: AlphaPolicy,
    ) -> Result<Self> {
        check_unit("beta", &beta)?;
        check_unit("target", &target)?;
        let overlap = beta.dot(&target);
        if overlap.abs() > DIRECTION_TOL {
            return Err(RspError::NotOrthogonal(overlap));
        }
        if let AlphaPolicy::Fixed(alpha) = &alpha_policy {
            check_unit("alpha", alpha)?;
        }
        Ok(Self {
            beta,
            target,
            alpha_policy,
        })
    }

    /// Optimal-α configuration with `β̂` picked by [`beta_for_target`].
    pub fn for_target(target: Vector3<f64>) -> Result<Self> {
        check_unit("target", &target)?;
        Self::new(beta_for_target(&target), target, AlphaPolicy::Optimal)
    }

    pub fn beta(&self) -> &Vector3<f64> {
        &self.beta
    }

    pub fn target(&self) -> &Vector3<f64> {
        &self.target
    }

    pub fn alpha_policy(&self) -> &AlphaPolicy {
        &self.alpha_policy
    }

    pub fn alpha(&self, rep: &BlochRep) -> Vector3<f64> {
        match self.alpha_policy {
            AlphaPolicy::Optimal => optimal_alpha(rep, &self.target),
            AlphaPolicy::Fixed(a) => a,
        }
    }
}

/// One realization of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct RspRound {
    pub alpha_hat: Vector3<f64>,
    pub outcome: Outcome,
    pub bob_conditional: Vector3<f64>,
    pub corrected: Vector3<f64>,
}

/// `P(α) = ½(1 + α α̂·a)`.
pub fn outcome_probability(rep: &BlochRep, alpha_hat: &Vector3<f64>, outcome: Outcome) -> f64 {
    0.5 * (1.0 + outcome.sign() * alpha_hat.dot(&rep.a))
}

/// Bob's Bloch vector after Alice obtains `outcome`:
/// `b_α = (b + α Eᵀα̂) / (1 + α α̂·a)`.
pub fn bob_conditional_state(
    rep: &BlochRep,
    alpha_hat: &Vector3<f64>,
    outcome: Outcome,
) -> Result<Vector3<f64>> {
    let probability = outcome_probability(rep, alpha_hat, outcome);
    if probability <= MIN_BRANCH_PROBABILITY {
        return Err(RspError::ZeroProbabilityBranch {
            outcome,
            probability,
        });
    }
    let s = outcome.sign();
    Ok((rep.b + rep.e.transpose() * alpha_hat * s) / (1.0 + s * alpha_hat.dot(&rep.a)))
}

/// π rotation about `β̂`: `2(v·β̂)β̂ − v`.
pub fn apply_correction(v: &Vector3<f64>, beta: &Vector3<f64>) -> Vector3<f64> {
    beta * (2.0 * v.dot(beta)) - v
}

/// `r = P(+1) b₊ + P(−1) R_π b₋`; impossible branches contribute nothing.
pub fn ensemble_state(
    rep: &BlochRep,
    alpha_hat: &Vector3<f64>,
    beta: &Vector3<f64>,
) -> Vector3<f64> {
    let mut r = Vector3::zeros();
    for outcome in [Outcome::Plus, Outcome::Minus] {
        let p = outcome_probability(rep, alpha_hat, outcome);
        if let Ok(b) = bob_conditional_state(rep, alpha_hat, outcome) {
            r += match outcome {
                Outcome::Plus => b * p,
                Outcome::Minus => apply_correction(&b, beta) * p,
            };
        }
    }
    r
}

/// `(r·s)²`.
pub fn payoff(r: &Vector3<f64>, s: &Vector3<f64>) -> f64 {
    let d = r.dot(s);
    d * d
}

/// `(α̂·E s)²`, the payoff once the ensemble has been worked out.
pub fn payoff_given_alpha(rep: &BlochRep, alpha_hat: &Vector3<f64>, s: &Vector3<f64>) -> f64 {
    let d = alpha_hat.dot(&(rep.e * s));
    d * d
}

/// `E s / ‖E s‖`, or `x̂` when `E s` vanishes.
pub fn optimal_alpha(rep: &BlochRep, s: &Vector3<f64>) -> Vector3<f64> {
    let es = rep.e * s;
    let n = es.norm();
    if n <= 1e-12 {
        Vector3::x()
    } else {
        es / n
    }
}

/// `P_opt = ‖E s‖²`.
pub fn optimal_payoff(rep: &BlochRep, s: &Vector3<f64>) -> f64 {
    (rep.e * s).norm_squared()
}

/// Mean of `P_opt` over targets on the circle orthogonal to `β̂`:
/// `½(‖E‖² − ‖E β̂‖²)`.
pub fn average_payoff(rep: &BlochRep, beta: &Vector3<f64>) -> f64 {
    0.5 * (rep.e.norm_squared() - (rep.e * beta).norm_squared())
}

/// Eigenvalues of `EᵀE`, descending, with their eigenvectors as columns.
fn gram_eigen(rep: &BlochRep) -> ([f64; 3], [Vector3<f64>; 3]) {
    let eig = (rep.e.transpose() * rep.e).symmetric_eigen();
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = idx.map(|i| eig.eigenvalues[i].max(0.0));
    let vecs = idx.map(|i| eig.eigenvectors.column(i).into_owned());
    (vals, vecs)
}

/// Worst case over `β̂` of the average optimal payoff, `½(E₂² + E₃²)`.
pub fn rsp_fidelity(rep: &BlochRep) -> f64 {
    let (vals, _) = gram_eigen(rep);
    0.5 * (vals[1] + vals[2])
}

/// A top eigenvector of `EᵀE`, which minimizes [`average_payoff`].
pub fn worst_beta(rep: &BlochRep) -> Vector3<f64> {
    let (_, vecs) = gram_eigen(rep);
    vecs[0].normalize()
}

/// Minimum of [`average_payoff`] over a Fibonacci grid of `β̂` directions.
pub fn rsp_fidelity_oracle(rep: &BlochRep, grid_points: usize) -> f64 {
    fibonacci_sphere(grid_points)
        .iter()
        .map(|beta| average_payoff(rep, beta))
        .fold(f64::INFINITY, f64::min)
}

/// `normalize(ẑ × s)`, or `x̂` when `s` is (anti)parallel to `ẑ`.
pub fn beta_for_target(s: &Vector3<f64>) -> Vector3<f64> {
    let c = Vector3::z().cross(s);
    let n = c.norm();
    if n < 1e-9 {
        Vector3::x()
    } else {
        c / n
    }
}

/// Golden-angle spiral lattice of `n` unit vectors.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            Vector3::new(rho * c, rho * s, z).normalize()
        })
        .collect()
}

/// Draws one protocol run.
pub fn play_round<R: Rng + ?Sized>(
    rep: &BlochRep,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<RspRound> {
    let alpha_hat = config.alpha(rep);
    let p_plus = outcome_probability(rep, &alpha_hat, Outcome::Plus);
    let outcome = if rng.random::<f64>() < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let bob_conditional = bob_conditional_state(rep, &alpha_hat, outcome)?;
    let corrected = match outcome {
        Outcome::Plus => bob_conditional,
        Outcome::Minus => apply_correction(&bob_conditional, &config.beta),
    };
    Ok(RspRound {
        alpha_hat,
        outcome,
        bob_conditional,
        corrected,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetRecord {
    pub target: Vector3<f64>,
    pub beta: Vector3<f64>,
    pub payoff_analytic: f64,
    pub payoff_mc: f64,
    pub stderr: f64,
    pub shots: u64,
}

fn simulate_with_rng<R: Rng + ?Sized>(
    rep: &BlochRep,
    config: &ProtocolConfig,
    shots: u64,
    rng: &mut R,
) -> Result<TargetRecord> {
    if shots == 0 {
        return Err(RspError::NoShots);
    }
    let alpha_hat = config.alpha(rep);
    let s = config.target;
    let p_plus = outcome_probability(rep, &alpha_hat, Outcome::Plus).clamp(0.0, 1.0);
    let n_plus = Binomial::new(shots, p_plus)
        .expect("probability lies in [0, 1]")
        .sample(rng);
    let f = n_plus as f64 / shots as f64;

    // projections of the two corrected branch vectors onto the target
    let x = bob_conditional_state(rep, &alpha_hat, Outcome::Plus)
        .map(|b| b.dot(&s))
        .unwrap_or(0.0);
    let y = bob_conditional_state(rep, &alpha_hat, Outcome::Minus)
        .map(|b| apply_correction(&b, &config.beta).dot(&s))
        .unwrap_or(0.0);
    let overlap = f * x + (1.0 - f) * y;
    // delta method on the binomial frequency
    let stderr = (2.0 * overlap * (x - y)).abs() * (f * (1.0 - f) / shots as f64).sqrt();

    Ok(TargetRecord {
        target: s,
        beta: config.beta,
        payoff_analytic: payoff_given_alpha(rep, &alpha_hat, &s),
        payoff_mc: overlap * overlap,
        stderr,
        shots,
    })
}

/// Monte Carlo estimate of the payoff from `shots` sampled outcomes, using the
/// exact conditional Bloch vectors and the empirical outcome frequencies.
pub fn simulate(
    rep: &BlochRep,
    config: &ProtocolConfig,
    shots: u64,
    seed: u64,
) -> Result<TargetRecord> {
    simulate_with_rng(rep, config, shots, &mut stream_rng(seed, 0))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub records: Vec<TargetRecord>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SWEEP_CSV_HEADER}")?;
        for (i, r) in self.records.iter().enumerate() {
            writeln!(w, "{i},{}", record_fields(r).join(","))?;
        }
        Ok(())
    }

    /// Per-target analytic `ΔP = P_self − P_other`; `None` when the two sweeps
    /// do not share targets.
    pub fn delta_analytic(&self, other: &SweepResult) -> Option<Vec<f64>> {
        self.zip_targets(other).map(|pairs| {
            pairs
                .map(|(a, b)| a.payoff_analytic - b.payoff_analytic)
                .collect()
        })
    }

    pub fn delta_mc(&self, other: &SweepResult) -> Option<Vec<f64>> {
        self.zip_targets(other)
            .map(|pairs| pairs.map(|(a, b)| a.payoff_mc - b.payoff_mc).collect())
    }

    fn zip_targets<'a>(
        &'a self,
        other: &'a SweepResult,
    ) -> Option<impl Iterator<Item = (&'a TargetRecord, &'a TargetRecord)> + 'a> {
        let same = self.records.len() == other.records.len()
            && self
                .records
                .iter()
                .zip(&other.records)
                .all(|(a, b)| (a.target - b.target).norm() <= 1e-12);
        same.then(|| self.records.iter().zip(&other.records))
    }
}

/// CSV fields of a record after the index column.
pub fn record_fields(r: &TargetRecord) -> Vec<String> {
    let mut out: Vec<String> = r
        .target
        .iter()
        .chain(r.beta.iter())
        .map(|&x| fmt_decimal(x))
        .collect();
    out.push(fmt_decimal(r.payoff_analytic));
    out.push(fmt_decimal(r.payoff_mc));
    out.push(fmt_decimal(r.stderr));
    out.push(r.shots.to_string());
    out
}

/// Runs every target with optimal `α̂` and `β̂` from [`beta_for_target`].
/// Target `i` draws from the stream `(seed, i)`.
pub fn sweep(
    rep: &BlochRep,
    targets: &[Vector3<f64>],
    shots: u64,
    seed: u64,
) -> Result<SweepResult> {
    let records = targets
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let config = ProtocolConfig::for_target(*s)?;
            simulate_with_rng(rep, &config, shots, &mut stream_rng(seed, i as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { records })
}
