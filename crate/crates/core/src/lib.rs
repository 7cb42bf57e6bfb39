//! Two-qubit quantum correlations and the remote-state-preparation protocol.
//!
//! - [`qstate`]: density matrices, Bloch/correlation-tensor form, purity,
//!   fidelity, entropies, concurrence.
//! - [`states`]: Bell, Werner, the isotropic `ρ_B` family, classical-quantum
//!   states, mixtures and seeded random ensembles.
//! - [`discord`]: geometric discord in closed form plus a brute-force oracle.
//! - [`rsp`]: protocol payoffs and fidelity, analytic and Monte Carlo.
//! - [`tomo`]: simulated Pauli coincidence counts and linear-inversion
//!   reconstruction.
//! - [`statefile`]: JSON state documents.
//! - [`cli`]: the `discord-rsp` command line.

pub mod cli;
pub mod discord;
pub mod qstate;
pub mod rsp;
pub mod statefile;
pub mod states;
pub mod tomo;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent deterministic random stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Plain decimal rendering with 15 significant digits (no exponent), used for
/// every floating-point CSV field.
pub fn fmt_decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).clamp(0, 60) as usize;
    format!("{x:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering() {
        assert_eq!(fmt_decimal(0.04), "0.0400000000000000");
        assert_eq!(fmt_decimal(-1.0), "-1.00000000000000");
        assert_eq!(fmt_decimal(0.0), "0");
        assert_eq!(fmt_decimal(-0.0), "0");
        assert_eq!(fmt_decimal(123456.0), "123456.000000000");
        let x = 1.0 / 9.0;
        assert!((fmt_decimal(x).parse::<f64>().unwrap() - x).abs() < 1e-15);
        assert!(!fmt_decimal(3.2e-9).contains('e'));
    }
}
