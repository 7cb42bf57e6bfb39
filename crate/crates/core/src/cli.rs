//! Command-line front end: state characterization, payoff sweeps over the
//! sphere and oracle cross-checks.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation or tolerance failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, RngCore};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::discord::{geometric_discord, geometric_discord_oracle, OracleConfig};
use crate::qstate::{concurrence, purity, state_fidelity, to_bloch, Spectrum, TwoQubitState};
use crate::rsp::{
    fibonacci_sphere, record_fields, rsp_fidelity, rsp_fidelity_oracle, sweep, RspError,
    SweepResult, SWEEP_CSV_HEADER,
};
use crate::statefile::{read_state, state_to_json, Representation, StateFileError};
use crate::states::{
    bell, random_qubit_state, random_state, random_unit_vector, rho_b, werner, zero_discord,
    BellKind, StatesError,
};
use crate::tomo::{emulate_measurement, NoiseSpec, TomoError};
use crate::{fmt_decimal, stream_rng};

/// Allowed `oracle − closed form` discord gap.
pub const DISCORD_GAP_TOL: f64 = 1e-3;
/// Allowed undershoot of the oracle below the closed form.
pub const DISCORD_UNDERSHOOT_TOL: f64 = 1e-6;
/// Allowed `|grid − eigen|` fidelity gap.
pub const FIDELITY_GAP_TOL: f64 = 5e-3;
/// Closed-form discord bound for the zero-discord ensemble.
pub const ZERO_DISCORD_TOL: f64 = 1e-9;

pub const SWEEP_PAIR_CSV_HEADER_EXTRA: &str =
    "payoff2_analytic,payoff2_mc,stderr2,delta_p_analytic,delta_p_mc";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    States(#[from] StatesError),
    #[error(transparent)]
    StateFile(#[from] StateFileError),
    #[error(transparent)]
    Tomo(#[from] TomoError),
    #[error(transparent)]
    Rsp(#[from] RspError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// `werner | rho_b | bell:<kind> | maximally-mixed | file:<path>`
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Werner,
    RhoB,
    Bell(BellKind),
    MaximallyMixed,
    File(PathBuf),
}

impl FromStr for StateSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "werner" => Ok(StateSpec::Werner),
            "rho_b" | "rho-b" => Ok(StateSpec::RhoB),
            "maximally-mixed" | "maximally_mixed" => Ok(StateSpec::MaximallyMixed),
            _ => {
                if let Some(kind) = s.strip_prefix("bell:") {
                    kind.parse()
                        .map(StateSpec::Bell)
                        .map_err(|_| format!("unknown Bell state '{kind}'"))
                } else if let Some(path) = s.strip_prefix("file:") {
                    if path.is_empty() {
                        return Err("file: needs a path".into());
                    }
                    Ok(StateSpec::File(PathBuf::from(path)))
                } else {
                    Err(format!(
                        "unknown state family '{s}' (expected werner, rho_b, bell:<kind>, maximally-mixed or file:<path>)"
                    ))
                }
            }
        }
    }
}

impl std::fmt::Display for StateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateSpec::Werner => write!(f, "werner"),
            StateSpec::RhoB => write!(f, "rho_b"),
            StateSpec::Bell(kind) => write!(f, "bell:{kind}"),
            StateSpec::MaximallyMixed => write!(f, "maximally-mixed"),
            StateSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn parse_noise(s: &str) -> std::result::Result<NoiseSpec, String> {
    s.parse().map_err(|e: TomoError| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ensemble {
    /// Random states with Haar eigenvectors; ranks cycle 1..4 unless `--rank` is set.
    Random,
    /// Classical-quantum mixtures, which carry no discord.
    ZeroDiscord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Repr {
    Matrix,
    Bloch,
}

#[derive(Debug, Parser)]
#[command(
    name = "discord-rsp",
    version,
    about = "Geometric discord and remote state preparation on two-qubit states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// State fidelity, purity, concurrence, geometric discord and RSP fidelity.
    Characterize(CharacterizeArgs),
    /// Per-target payoffs of two resource states over a Fibonacci sphere.
    RspSweep(SweepArgs),
    /// Compares closed forms against numerical minimizations on an ensemble.
    OracleCheck(OracleArgs),
    /// Writes a named state as a JSON state document.
    EmitState(EmitArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FamilyParams {
    /// Werner weight of the singlet.
    #[arg(long, default_value_t = 1.0 / 3.0, allow_negative_numbers = true)]
    pub lambda: f64,
    /// rho_b correlation strength.
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub k: f64,
    /// rho_b local polarization.
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub t: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write results here (plus `<PATH>.manifest.json`) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct CharacterizeArgs {
    #[arg(long, default_value = "werner")]
    pub state: StateSpec,
    #[command(flatten)]
    pub params: FamilyParams,
    /// `poisson:<mean_total>[,rot:<axis>:<angle>]`; characterizes the tomographic reconstruction.
    #[arg(long, value_parser = parse_noise)]
    pub noise: Option<NoiseSpec>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "werner")]
    pub state: StateSpec,
    #[arg(long, default_value = "rho_b")]
    pub state2: StateSpec,
    #[command(flatten)]
    pub params: FamilyParams,
    #[arg(long, default_value_t = 58, value_parser = clap::value_parser!(u64).range(1..))]
    pub targets: u64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replaces both states by tomographic reconstructions from simulated counts.
    #[arg(long, value_parser = parse_noise)]
    pub noise: Option<NoiseSpec>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value = "random")]
    pub ensemble: Ensemble,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub rank: Option<u64>,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub grid_points: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EmitArgs {
    #[arg(long, default_value = "werner")]
    pub state: StateSpec,
    #[command(flatten)]
    pub params: FamilyParams,
    #[arg(long, value_enum, default_value = "matrix")]
    pub repr: Repr,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn resolve_state(spec: &StateSpec, params: &FamilyParams) -> Result<TwoQubitState> {
    Ok(match spec {
        StateSpec::Werner => werner(params.lambda)?,
        StateSpec::RhoB => rho_b(params.k, params.t)?,
        StateSpec::Bell(kind) => bell(*kind),
        StateSpec::MaximallyMixed => TwoQubitState::maximally_mixed(),
        StateSpec::File(path) => read_state(path)?,
    })
}

/// Independent seed for a sub-task of a run.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    stream_rng(seed, (1 << 32) + tag).next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Characterization {
    pub state_fidelity: f64,
    pub purity: f64,
    pub concurrence: f64,
    pub geometric_discord: f64,
    pub rsp_fidelity: f64,
}

impl Characterization {
    pub fn rows(&self) -> [(&'static str, f64); 5] {
        [
            ("state_fidelity", self.state_fidelity),
            ("purity", self.purity),
            ("concurrence", self.concurrence),
            ("geometric_discord", self.geometric_discord),
            ("rsp_fidelity", self.rsp_fidelity),
        ]
    }
}

pub fn characterize_state(rho: &TwoQubitState) -> Characterization {
    Characterization {
        state_fidelity: 1.0,
        purity: purity(rho),
        concurrence: concurrence(rho),
        geometric_discord: geometric_discord(rho).value,
        rsp_fidelity: rsp_fidelity(&to_bloch(rho)),
    }
}

/// The state actually used as a resource: the ideal one, or its
/// reconstruction from simulated counts. `slot` separates the noise
/// realizations of the two states in a sweep.
pub fn resource_state(
    ideal: &TwoQubitState,
    noise: Option<&NoiseSpec>,
    seed: u64,
    slot: u64,
) -> Result<TwoQubitState> {
    match noise {
        None => Ok(ideal.clone()),
        Some(n) => Ok(emulate_measurement(ideal, n, derive_seed(seed, slot))?.state),
    }
}

pub fn characterize_with_noise(
    ideal: &TwoQubitState,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<Characterization> {
    let rho = resource_state(ideal, noise, seed, 1)?;
    let mut c = characterize_state(&rho);
    if noise.is_some() {
        c.state_fidelity = state_fidelity(ideal, &rho);
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPair {
    pub first: SweepResult,
    pub second: SweepResult,
    pub delta_analytic: Vec<f64>,
    pub delta_mc: Vec<f64>,
}

impl SweepPair {
    pub fn write_csv(&self, out: &mut String) {
        let _ = writeln!(out, "{SWEEP_CSV_HEADER},{SWEEP_PAIR_CSV_HEADER_EXTRA}");
        for (i, (r1, r2)) in self
            .first
            .records
            .iter()
            .zip(&self.second.records)
            .enumerate()
        {
            let mut fields = vec![i.to_string()];
            fields.extend(record_fields(r1));
            fields.extend(
                [
                    r2.payoff_analytic,
                    r2.payoff_mc,
                    r2.stderr,
                    self.delta_analytic[i],
                    self.delta_mc[i],
                ]
                .map(fmt_decimal),
            );
            let _ = writeln!(out, "{}", fields.join(","));
        }
    }

    pub fn write_text(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "{:>5} {:>9} {:>9} {:>9} {:>12} {:>12} {:>12} {:>12}",
            "index", "sx", "sy", "sz", "payoff1", "payoff2", "delta_p", "delta_p_mc"
        );
        for (i, (r1, r2)) in self
            .first
            .records
            .iter()
            .zip(&self.second.records)
            .enumerate()
        {
            let _ = writeln!(
                out,
                "{i:>5} {:>9.5} {:>9.5} {:>9.5} {:>12.8} {:>12.8} {:>12.8} {:>12.8}",
                r1.target.x,
                r1.target.y,
                r1.target.z,
                r1.payoff_analytic,
                r2.payoff_analytic,
                self.delta_analytic[i],
                self.delta_mc[i]
            );
        }
    }
}

pub fn sweep_pair(
    rho1: &TwoQubitState,
    rho2: &TwoQubitState,
    targets: usize,
    shots: u64,
    seed: u64,
    noise: Option<&NoiseSpec>,
) -> Result<SweepPair> {
    if targets == 0 {
        return Err(CliError::Usage("need at least one target".into()));
    }
    let r1 = to_bloch(&resource_state(rho1, noise, seed, 1)?);
    let r2 = to_bloch(&resource_state(rho2, noise, seed, 2)?);
    let points = fibonacci_sphere(targets);
    // same seed for both states: common random numbers sharpen ΔP_mc
    let first = sweep(&r1, &points, shots, seed)?;
    let second = sweep(&r2, &points, shots, seed)?;
    let delta_analytic = first.delta_analytic(&second).expect("same targets");
    let delta_mc = first.delta_mc(&second).expect("same targets");
    Ok(SweepPair {
        first,
        second,
        delta_analytic,
        delta_mc,
    })
}

fn min_mean(xs: &[f64]) -> (f64, f64) {
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    (min, xs.iter().sum::<f64>() / xs.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub index: usize,
    pub rank: usize,
    pub closed_form: f64,
    pub oracle: f64,
    pub fidelity: f64,
    pub grid_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    pub max_discord_gap: f64,
    pub min_discord_gap: f64,
    pub max_fidelity_gap: f64,
    pub max_closed_form: f64,
}

impl OracleReport {
    /// Violated tolerances; empty when the check passes.
    pub fn failures(&self, ensemble: Ensemble) -> Vec<String> {
        let mut out = Vec::new();
        if self.max_discord_gap > DISCORD_GAP_TOL {
            out.push(format!(
                "max discord gap {:e} exceeds {DISCORD_GAP_TOL:e}",
                self.max_discord_gap
            ));
        }
        if self.min_discord_gap < -DISCORD_UNDERSHOOT_TOL {
            out.push(format!(
                "oracle undershoots closed form by {:e}",
                -self.min_discord_gap
            ));
        }
        if self.max_fidelity_gap > FIDELITY_GAP_TOL {
            out.push(format!(
                "max fidelity gap {:e} exceeds {FIDELITY_GAP_TOL:e}",
                self.max_fidelity_gap
            ));
        }
        if ensemble == Ensemble::ZeroDiscord && self.max_closed_form > ZERO_DISCORD_TOL {
            out.push(format!(
                "closed-form discord {:e} on a zero-discord state",
                self.max_closed_form
            ));
        }
        out
    }
}

pub fn ensemble_state(
    ensemble: Ensemble,
    index: usize,
    rank: Option<usize>,
    seed: u64,
) -> Result<(TwoQubitState, usize)> {
    let state_seed = derive_seed(seed, 1000 + index as u64);
    match ensemble {
        Ensemble::Random => {
            let rank = rank.unwrap_or(1 + index % 4);
            Ok((random_state(state_seed, rank)?, rank))
        }
        Ensemble::ZeroDiscord => {
            let mut rng = stream_rng(state_seed, 0);
            let p: f64 = rng.random();
            let v = random_unit_vector(&mut rng);
            let rho1 = random_qubit_state(&mut rng);
            let rho2 = random_qubit_state(&mut rng);
            let rho = zero_discord(p, &v, &rho1, &rho2)?;
            let rank = rho.eigenvalues().iter().filter(|&&x| x > 1e-12).count();
            Ok((rho, rank))
        }
    }
}

pub fn oracle_check(args: &OracleArgs) -> Result<OracleReport> {
    let mut rows = Vec::with_capacity(args.count);
    for index in 0..args.count {
        let (rho, rank) = ensemble_state(
            args.ensemble,
            index,
            args.rank.map(|r| r as usize),
            args.seed,
        )?;
        let config = OracleConfig {
            restarts: args.restarts as usize,
            seed: derive_seed(args.seed, index as u64),
            ..OracleConfig::default()
        };
        let rep = to_bloch(&rho);
        rows.push(OracleRow {
            index,
            rank,
            closed_form: geometric_discord(&rho).value,
            oracle: geometric_discord_oracle(&rho, &config),
            fidelity: rsp_fidelity(&rep),
            grid_fidelity: rsp_fidelity_oracle(&rep, args.grid_points as usize),
        });
    }
    let gaps: Vec<f64> = rows.iter().map(|r| r.oracle - r.closed_form).collect();
    Ok(OracleReport {
        max_discord_gap: gaps.iter().copied().fold(0.0, f64::max),
        min_discord_gap: gaps.iter().copied().fold(0.0, f64::min),
        max_fidelity_gap: rows
            .iter()
            .map(|r| (r.grid_fidelity - r.fidelity).abs())
            .fold(0.0, f64::max),
        max_closed_form: rows.iter().map(|r| r.closed_form).fold(0.0, f64::max),
        rows,
    })
}

struct Emitted {
    body: String,
    summary: Option<String>,
}

fn emit(
    command: &str,
    params: serde_json::Value,
    seed: Option<u64>,
    out: Option<&Path>,
    emitted: Emitted,
    started: Instant,
) -> Result<()> {
    match out {
        Some(path) => {
            write_atomic(path, emitted.body.as_bytes())?;
            let manifest = RunManifest {
                command: command.to_string(),
                params,
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                outputs: vec![path.display().to_string()],
                duration_secs: started.elapsed().as_secs_f64(),
            };
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            write_atomic(&manifest_path(path), text.as_bytes())?;
            if let Some(s) = emitted.summary {
                print!("{s}");
            }
        }
        None => {
            print!("{}", emitted.body);
            if let Some(s) = emitted.summary {
                eprint!("{s}");
            }
        }
    }
    Ok(())
}

fn noise_note(noise: Option<&NoiseSpec>) -> String {
    match noise {
        Some(n) => format!("noise {n} (assumed count level per setting)\n"),
        None => String::new(),
    }
}

fn run_characterize(args: &CharacterizeArgs, started: Instant) -> Result<()> {
    let ideal = resolve_state(&args.state, &args.params)?;
    let c = characterize_with_noise(&ideal, args.noise.as_ref(), args.seed)?;
    let mut body = String::new();
    match args.output.format.unwrap_or(Format::Text) {
        Format::Csv => {
            body.push_str("quantity,value\n");
            for (name, v) in c.rows() {
                let _ = writeln!(body, "{name},{}", fmt_decimal(v));
            }
        }
        Format::Text => {
            body.push_str(&noise_note(args.noise.as_ref()));
            for (name, v) in c.rows() {
                let _ = writeln!(body, "{name:<18} {}", fmt_decimal(v));
            }
        }
    }
    let params = json!({
        "state": args.state.to_string(),
        "lambda": args.params.lambda,
        "k": args.params.k,
        "t": args.params.t,
        "noise": args.noise.as_ref().map(|n| n.to_string()),
        "format": format!("{:?}", args.output.format.unwrap_or(Format::Text)).to_lowercase(),
    });
    emit(
        "characterize",
        params,
        Some(args.seed),
        args.output.out.as_deref(),
        Emitted {
            body,
            summary: None,
        },
        started,
    )
}

fn run_sweep(args: &SweepArgs, started: Instant) -> Result<()> {
    let rho1 = resolve_state(&args.state, &args.params)?;
    let rho2 = resolve_state(&args.state2, &args.params)?;
    let targets =
        usize::try_from(args.targets).map_err(|_| CliError::Usage("too many targets".into()))?;
    let pair = sweep_pair(
        &rho1,
        &rho2,
        targets,
        args.shots,
        args.seed,
        args.noise.as_ref(),
    )?;
    let format = args.output.format.unwrap_or(Format::Csv);
    let mut body = String::new();
    match format {
        Format::Csv => pair.write_csv(&mut body),
        Format::Text => pair.write_text(&mut body),
    }
    let (min_a, mean_a) = min_mean(&pair.delta_analytic);
    let (min_m, mean_m) = min_mean(&pair.delta_mc);
    let mut summary = format!(
        "state {} vs state2 {}: {} targets, {} shots, seed {}\n",
        args.state, args.state2, targets, args.shots, args.seed
    );
    summary.push_str(&noise_note(args.noise.as_ref()));
    let _ = writeln!(summary, "min delta_p_analytic  {}", fmt_decimal(min_a));
    let _ = writeln!(summary, "mean delta_p_analytic {}", fmt_decimal(mean_a));
    let _ = writeln!(summary, "min delta_p_mc        {}", fmt_decimal(min_m));
    let _ = writeln!(summary, "mean delta_p_mc       {}", fmt_decimal(mean_m));
    let params = json!({
        "state": args.state.to_string(),
        "state2": args.state2.to_string(),
        "lambda": args.params.lambda,
        "k": args.params.k,
        "t": args.params.t,
        "targets": args.targets,
        "shots": args.shots,
        "noise": args.noise.as_ref().map(|n| n.to_string()),
        "format": format!("{format:?}").to_lowercase(),
    });
    // text output on stdout already belongs to the reader; keep the summary with it
    let (body, summary) = if format == Format::Text && args.output.out.is_none() {
        (body + "\n" + &summary, None)
    } else {
        (body, Some(summary))
    };
    emit(
        "rsp-sweep",
        params,
        Some(args.seed),
        args.output.out.as_deref(),
        Emitted { body, summary },
        started,
    )
}

fn run_oracle_check(args: &OracleArgs, started: Instant) -> Result<()> {
    let report = oracle_check(args)?;
    let failures = report.failures(args.ensemble);
    let mut summary = String::new();
    let _ = writeln!(summary, "states                    {}", report.rows.len());
    let _ = writeln!(
        summary,
        "max discord gap           {:e}",
        report.max_discord_gap
    );
    let _ = writeln!(
        summary,
        "min discord gap           {:e}",
        report.min_discord_gap
    );
    let _ = writeln!(
        summary,
        "max fidelity gap          {:e}",
        report.max_fidelity_gap
    );
    let _ = writeln!(
        summary,
        "max closed-form discord   {:e}",
        report.max_closed_form
    );
    let _ = writeln!(
        summary,
        "{}",
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );

    let format = args.output.format.unwrap_or(Format::Text);
    let (body, summary) = match format {
        Format::Text => (summary, None),
        Format::Csv => {
            let mut body = String::from("index,rank,closed_form,oracle,discord_gap,rsp_fidelity,grid_fidelity,fidelity_gap\n");
            for r in &report.rows {
                let fields = [
                    r.closed_form,
                    r.oracle,
                    r.oracle - r.closed_form,
                    r.fidelity,
                    r.grid_fidelity,
                    r.grid_fidelity - r.fidelity,
                ]
                .map(fmt_decimal);
                let _ = writeln!(body, "{},{},{}", r.index, r.rank, fields.join(","));
            }
            (body, Some(summary))
        }
    };
    let params = json!({
        "ensemble": format!("{:?}", args.ensemble),
        "count": args.count,
        "rank": args.rank,
        "restarts": args.restarts,
        "grid_points": args.grid_points,
        "format": format!("{format:?}").to_lowercase(),
    });
    emit(
        "oracle-check",
        params,
        Some(args.seed),
        args.output.out.as_deref(),
        Emitted { body, summary },
        started,
    )?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(failures.join("; ")))
    }
}

fn run_emit_state(args: &EmitArgs, started: Instant) -> Result<()> {
    let rho = resolve_state(&args.state, &args.params)?;
    let repr = match args.repr {
        Repr::Matrix => Representation::Matrix,
        Repr::Bloch => Representation::Bloch,
    };
    let body = state_to_json(&rho, repr) + "\n";
    let params = json!({
        "state": args.state.to_string(),
        "lambda": args.params.lambda,
        "k": args.params.k,
        "t": args.params.t,
        "repr": format!("{:?}", args.repr).to_lowercase(),
    });
    emit(
        "emit-state",
        params,
        None,
        args.out.as_deref(),
        Emitted {
            body,
            summary: None,
        },
        started,
    )
}

pub fn execute(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    match &cli.command {
        Command::Characterize(a) => run_characterize(a, started),
        Command::RspSweep(a) => run_sweep(a, started),
        Command::OracleCheck(a) => run_oracle_check(a, started),
        Command::EmitState(a) => run_emit_state(a, started),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
