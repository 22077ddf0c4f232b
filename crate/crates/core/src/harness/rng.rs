//! Reproducible random streams and Gaussian time sampling.
//!
//! Every ride draws from its own ChaCha8 stream keyed by
//! `(master_seed, grid index, round, ψ index)`, so results do not depend on
//! the order in which rides are executed.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};
use crate::oracle::GaussianTimeParams;

pub const MAX_GRID_POINTS: usize = 1 << 24;
pub const MAX_ROUNDS: usize = 1 << 24;
pub const MAX_PSI: usize = 1 << 16;

const PSI_DOMAIN: u64 = 0x5053_495f_4452_4157; // "PSI_DRAW"

/// Substream for ride `(grid, round, psi)`.
pub fn ride_stream(master_seed: u64, grid: usize, round: usize, psi: usize) -> ChaCha8Rng {
    debug_assert!(grid < MAX_GRID_POINTS && round < MAX_ROUNDS && psi < MAX_PSI);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((grid as u64) << 40) | ((round as u64) << 16) | psi as u64);
    rng
}

/// Substream used to draw random initial-state angles for ψ index `psi`.
pub fn psi_stream(master_seed: u64, psi: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ PSI_DOMAIN);
    rng.set_stream(psi as u64);
    rng
}

/// Uniform on the open interval (0, 1) from the top 53 bits of one word.
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal quantile `Φ⁻¹(u) = −√2 · erfc⁻¹(2u)`.
pub fn probit(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// `n` independent Normal(τ, d²) times by inversion; negative times are kept.
pub fn sample_times<R: RngCore + ?Sized>(
    p: GaussianTimeParams,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    (0..n).map(|_| p.tau + p.d * probit(open_unit(rng))).collect()
}

/// Uniform `(θ, φ) ∈ [0, π] × [0, 2π)` per qubit.
pub fn random_angles<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Vec<[f64; 2]> {
    (0..qubits)
        .map(|_| {
            [
                rng.random::<f64>() * std::f64::consts::PI,
                rng.random::<f64>() * std::f64::consts::TAU,
            ]
        })
        .collect()
}

pub(crate) fn check_stream_limits(grid: usize, rounds: usize, psi: usize) -> Result<()> {
    if grid > MAX_GRID_POINTS || rounds > MAX_ROUNDS || psi > MAX_PSI {
        return Err(Error::InvalidParameter(format!(
            "scan too large for stream keys (grid {grid}, rounds {rounds}, psi {psi})"
        )));
    }
    Ok(())
}
