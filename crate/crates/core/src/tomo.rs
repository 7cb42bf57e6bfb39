//! Simulated coincidence counts for the nine joint Pauli settings and
//! linear-inversion reconstruction.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::qstate::{
    apply_local_unitaries, rotation_unitary, to_bloch, BlochRep, Mat2, StateError, TwoQubitState,
};
use crate::stream_rng;

pub const COUNTS_CSV_HEADER: &str = "k,l,n_pp,n_pm,n_mp,n_mm";

/// Counts per setting used when no rate is given.
pub const DEFAULT_MEAN_TOTAL: f64 = 1e4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomoError {
    #[error("no counts for setting ({k},{l})")]
    MissingSetting { k: usize, l: usize },
    #[error("setting ({k},{l}) has zero total counts")]
    EmptyCounts { k: usize, l: usize },
    #[error("setting ({k},{l}) appears more than once")]
    DuplicateSetting { k: usize, l: usize },
    #[error("invalid outcome probabilities {0:?}")]
    InvalidProbabilities([f64; 4]),
    #[error("mean count {0} must be finite and non-negative")]
    InvalidRate(f64),
    #[error("duration weights must be non-negative with a positive sum")]
    InvalidWeights,
    #[error("malformed noise spec '{0}'")]
    BadNoiseSpec(String),
    #[error("malformed counts file: {0}")]
    BadCounts(String),
    #[error(transparent)]
    State(#[from] StateError),
}

pub type Result<T> = std::result::Result<T, TomoError>;

/// Joint measurement of `σ_k ⊗ σ_l`, axes 0-based (X, Y, Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Setting {
    pub k: usize,
    pub l: usize,
}

impl Setting {
    pub fn all() -> impl Iterator<Item = Setting> {
        (0..3).flat_map(|k| (0..3).map(move |l| Setting { k, l }))
    }

    fn index(self) -> usize {
        3 * self.k + self.l
    }
}

/// Counts for outcomes `(+,+), (+,−), (−,+), (−,−)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    pub setting: Setting,
    pub counts: [u64; 4],
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// `P(α, β) = ¼(1 + α a_k + β b_l + αβ E_kl)` in the order `++, +−, −+, −−`.
pub fn measurement_probabilities(rep: &BlochRep, setting: Setting) -> [f64; 4] {
    let (a, b, e) = (
        rep.a[setting.k],
        rep.b[setting.l],
        rep.e[(setting.k, setting.l)],
    );
    let mut out = [0.0; 4];
    for (i, (sa, sb)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .into_iter()
        .enumerate()
    {
        out[i] = (0.25 * (1.0 + sa * a + sb * b + sa * sb * e)).max(0.0);
    }
    out
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng);
    draw as u64
}

fn check_probs(probs: &[f64; 4]) -> Result<()> {
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(TomoError::InvalidProbabilities(*probs));
    }
    Ok(())
}

fn check_rate(rate: f64) -> Result<()> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(TomoError::InvalidRate(rate));
    }
    Ok(())
}

fn sample_counts_rng<R: Rng + ?Sized>(
    probs: &[f64; 4],
    mean_total: f64,
    setting: Setting,
    rng: &mut R,
) -> CountRecord {
    CountRecord {
        setting,
        counts: probs.map(|p| poisson(mean_total * p, rng)),
    }
}

/// Independent Poisson counts with means `mean_total · p`.
pub fn sample_counts(
    probs: &[f64; 4],
    mean_total: f64,
    setting: Setting,
    seed: u64,
) -> Result<CountRecord> {
    check_probs(probs)?;
    check_rate(mean_total)?;
    Ok(sample_counts_rng(
        probs,
        mean_total,
        setting,
        &mut stream_rng(seed, 0),
    ))
}

/// Noise-free counts `round(total · p)` for every setting.
pub fn scaled_counts(rep: &BlochRep, total: f64) -> Vec<CountRecord> {
    Setting::all()
        .map(|setting| CountRecord {
            setting,
            counts: measurement_probabilities(rep, setting).map(|p| (p * total).round() as u64),
        })
        .collect()
}

/// Poisson counts for all nine settings; setting `i` draws from stream
/// `(seed, i)`.
pub fn sample_all_settings(
    rho: &TwoQubitState,
    mean_total: f64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    check_rate(mean_total)?;
    let rep = to_bloch(rho);
    Ok(Setting::all()
        .map(|s| {
            let probs = measurement_probabilities(&rep, s);
            sample_counts_rng(
                &probs,
                mean_total,
                s,
                &mut stream_rng(seed, s.index() as u64),
            )
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub state: TwoQubitState,
    /// Raw linear estimate before any positivity repair.
    pub estimate: BlochRep,
    /// Whether negative eigenvalues had to be clipped.
    pub repaired: bool,
}

/// Linear inversion from the nine joint settings. Marginals are averaged
/// over the three settings sharing an axis. A non-positive estimate is
/// repaired by clipping negative eigenvalues and renormalizing.
pub fn linear_inversion(records: &[CountRecord]) -> Result<Reconstruction> {
    let mut slots: [Option<&CountRecord>; 9] = [None; 9];
    for r in records {
        let (k, l) = (r.setting.k, r.setting.l);
        if k > 2 || l > 2 {
            return Err(TomoError::BadCounts(format!(
                "setting ({},{}) out of range",
                k + 1,
                l + 1
            )));
        }
        let slot = &mut slots[r.setting.index()];
        if slot.is_some() {
            return Err(TomoError::DuplicateSetting { k: k + 1, l: l + 1 });
        }
        *slot = Some(r);
    }

    let mut a = Vector3::zeros();
    let mut b = Vector3::zeros();
    let mut e = Matrix3::zeros();
    for s in Setting::all() {
        let r = slots[s.index()].ok_or(TomoError::MissingSetting {
            k: s.k + 1,
            l: s.l + 1,
        })?;
        let n = r.total();
        if n == 0 {
            return Err(TomoError::EmptyCounts {
                k: s.k + 1,
                l: s.l + 1,
            });
        }
        let [pp, pm, mp, mm] = r.counts.map(|c| c as f64 / n as f64);
        a[s.k] += (pp + pm - mp - mm) / 3.0;
        b[s.l] += (pp - pm + mp - mm) / 3.0;
        e[(s.k, s.l)] = pp - pm - mp + mm;
    }
    let estimate = BlochRep::new(a, b, e);
    let (state, repaired) = TwoQubitState::from_matrix_clipped(&estimate.assemble())?;
    if repaired {
        log::debug!("linear inversion estimate was not positive; clipped negative eigenvalues");
    }
    Ok(Reconstruction {
        state,
        estimate,
        repaired,
    })
}

/// Counts for a mixture realized by measuring each component for a time
/// proportional to its weight: per setting, component `j` contributes
/// Poisson counts with mean `mean_rate · w_j · p_j`.
pub fn mixture_by_duration(
    components: &[(f64, TwoQubitState)],
    mean_rate: f64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    check_rate(mean_rate)?;
    let total: f64 = components.iter().map(|(w, _)| *w).sum();
    if components.iter().any(|(w, _)| !w.is_finite() || *w < 0.0) || total <= 0.0 {
        return Err(TomoError::InvalidWeights);
    }
    let reps: Vec<BlochRep> = components.iter().map(|(_, s)| to_bloch(s)).collect();
    Ok(Setting::all()
        .map(|s| {
            let mut counts = [0u64; 4];
            for (j, ((w, _), rep)) in components.iter().zip(&reps).enumerate() {
                let mut rng = stream_rng(seed, (s.index() * components.len() + j) as u64);
                let part = sample_counts_rng(
                    &measurement_probabilities(rep, s),
                    mean_rate * w,
                    s,
                    &mut rng,
                );
                for (c, p) in counts.iter_mut().zip(part.counts) {
                    *c += p;
                }
            }
            CountRecord { setting: s, counts }
        })
        .collect())
}

/// Rotates Bob's qubit by `angle` about `axis`: `b → R b`, `E → E Rᵀ`.
pub fn perturb_local_rotation(
    rho: &TwoQubitState,
    axis: &Vector3<f64>,
    angle: f64,
) -> TwoQubitState {
    apply_local_unitaries(rho, &Mat2::identity(), &rotation_unitary(axis, angle))
}

/// `poisson:<mean_total>[,rot:<axis>:<angle>]`, axis `x`, `y`, `z` or
/// `ax/ay/az`, angle in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub mean_total: f64,
    pub rotation: Option<(Vector3<f64>, f64)>,
}

impl FromStr for NoiseSpec {
    type Err = TomoError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || TomoError::BadNoiseSpec(s.to_string());
        let mut parts = s.split(',');
        let head = parts.next().ok_or_else(bad)?;
        let mean_total: f64 = head
            .strip_prefix("poisson:")
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        if !mean_total.is_finite() || mean_total <= 0.0 {
            return Err(bad());
        }
        let mut rotation = None;
        for part in parts {
            let fields: Vec<&str> = part.split(':').collect();
            if fields.len() != 3 || fields[0] != "rot" || rotation.is_some() {
                return Err(bad());
            }
            let axis = match fields[1] {
                "x" => Vector3::x(),
                "y" => Vector3::y(),
                "z" => Vector3::z(),
                other => {
                    let v: Vec<f64> = other
                        .split('/')
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad())?;
                    if v.len() != 3 {
                        return Err(bad());
                    }
                    Vector3::new(v[0], v[1], v[2])
                }
            };
            let norm = axis.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(bad());
            }
            let angle: f64 = fields[2].parse().map_err(|_| bad())?;
            if !angle.is_finite() {
                return Err(bad());
            }
            rotation = Some((axis / norm, angle));
        }
        Ok(NoiseSpec {
            mean_total,
            rotation,
        })
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "poisson:{}", self.mean_total)?;
        if let Some((axis, angle)) = &self.rotation {
            write!(f, ",rot:{}/{}/{}:{}", axis.x, axis.y, axis.z, angle)?;
        }
        Ok(())
    }
}

/// Experiment-like pipeline: optional Bob-side rotation, Poisson counts at
/// `mean_total` per setting, linear inversion.
pub fn emulate_measurement(
    rho: &TwoQubitState,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<Reconstruction> {
    let source = match &noise.rotation {
        Some((axis, angle)) => perturb_local_rotation(rho, axis, *angle),
        None => rho.clone(),
    };
    linear_inversion(&sample_all_settings(&source, noise.mean_total, seed)?)
}

/// Writes records with 1-based axis indices.
pub fn write_counts_csv<W: Write>(records: &[CountRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{COUNTS_CSV_HEADER}")?;
    for r in records {
        let [pp, pm, mp, mm] = r.counts;
        writeln!(
            w,
            "{},{},{pp},{pm},{mp},{mm}",
            r.setting.k + 1,
            r.setting.l + 1
        )?;
    }
    Ok(())
}

pub fn read_counts_csv<R: BufRead>(r: R) -> Result<Vec<CountRecord>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| TomoError::BadCounts("empty input".into()))?
        .map_err(|e| TomoError::BadCounts(e.to_string()))?;
    if header.trim() != COUNTS_CSV_HEADER {
        return Err(TomoError::BadCounts(format!(
            "unexpected header '{header}'"
        )));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(|e| TomoError::BadCounts(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<u64> = line
            .split(',')
            .map(|f| f.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| TomoError::BadCounts(format!("'{line}': {e}")))?;
        if v.len() != 6 || !(1..=3).contains(&v[0]) || !(1..=3).contains(&v[1]) {
            return Err(TomoError::BadCounts(format!("'{line}'")));
        }
        out.push(CountRecord {
            setting: Setting {
                k: v[0] as usize - 1,
                l: v[1] as usize - 1,
            },
            counts: [v[2], v[3], v[4], v[5]],
        });
    }
    Ok(out)
}
