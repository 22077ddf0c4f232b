//! Closed-form filter responses.
//!
//! Everything here is evaluated analytically from level weights
//! `w_x = |⟨x|ψ_I⟩|²` and eigenvalues `E_x`; nothing runs the simulator.
//!
//! Two forms of the score are exposed:
//! - the per-ancilla mean `h = −Σ_x w_x (1/N) Σ_k cos[(E−E_x)t_k]`, whose
//!   Gaussian average does not depend on `N`;
//! - the product `g = (−1)^N Σ_x w_x ∏_k cos[(E−E_x)t_k]`.

mod dos;

pub use dos::{beta, dos, dos_compact, entropy, entropy_and_beta, entropy_compact, DosCurve};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{zeeman_levels, SpectralDecomposition, ZeemanParams};
use crate::qcore::StateVector;
use crate::states::{BellFamily, BellLabel, PsiSpec};

const WEIGHT_SUM_TOL: f64 = 1e-10;

/// Eigenvalues paired with overlap weights `|⟨x|ψ_I⟩|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralWeights {
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralWeights {
    pub fn new(eigenvalues: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: eigenvalues.len(), got: weights.len() });
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { eigenvalues, weights })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.eigenvalues.iter().copied().zip(self.weights.iter().copied())
    }

    /// Weight summed over each distinct level (eigenvalues within `tol`),
    /// as `(energy, weight)` sorted by energy.
    pub fn level_weights(&self, tol: f64) -> Vec<(f64, f64)> {
        let mut pairs: Vec<(f64, f64)> = self.iter().collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut levels: Vec<(f64, f64)> = Vec::new();
        for (e, w) in pairs {
            match levels.last_mut() {
                Some(last) if (e - last.0).abs() < tol => last.1 += w,
                _ => levels.push((e, w)),
            }
        }
        levels
    }
}

/// Normal(τ, d²) distribution of evolution times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTimeParams {
    pub tau: f64,
    pub d: f64,
}

impl GaussianTimeParams {
    pub fn new(tau: f64, d: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite tau and d > 0 (tau = {tau}, d = {d})"
            )));
        }
        Ok(Self { tau, d })
    }
}

/// `w_x = |⟨x|ψ_I⟩|²` for every eigenvector; degenerate levels keep separate entries.
pub fn overlaps_from_state(
    psi: &StateVector,
    decomp: &SpectralDecomposition,
) -> Result<SpectralWeights> {
    if psi.dim() != decomp.dim() {
        return Err(Error::DimensionMismatch { expected: decomp.dim(), got: psi.dim() });
    }
    let v = decomp.eigenvectors();
    let amps = psi.amplitudes();
    let weights: Vec<f64> = (0..decomp.dim())
        .map(|x| {
            amps.iter()
                .enumerate()
                .map(|(i, a)| v[(i, x)].conj() * a)
                .sum::<crate::qcore::C64>()
                .norm_sqr()
        })
        .collect();
    // Rounding can leave the sum a few ulps away from one.
    let total: f64 = weights.iter().sum();
    SpectralWeights::new(decomp.eigenvalues().to_vec(), weights.iter().map(|w| w / total).collect())
}

/// Per-ancilla mean score for fixed times.
pub fn g_given_times(w: &SpectralWeights, energy: f64, times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("times must not be empty".into()));
    }
    let n = times.len() as f64;
    Ok(-w
        .iter()
        .map(|(ex, wx)| wx * times.iter().map(|t| ((energy - ex) * t).cos()).sum::<f64>() / n)
        .sum::<f64>())
}

/// Product score `(−1)^N Σ_x w_x ∏_k cos[(E−E_x)t_k]` for fixed times.
pub fn g_product_given_times(w: &SpectralWeights, energy: f64, times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("times must not be empty".into()));
    }
    let sign = if times.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign
        * w.iter()
            .map(|(ex, wx)| wx * times.iter().map(|t| ((energy - ex) * t).cos()).product::<f64>())
            .sum::<f64>())
}

/// `E[cos(βt)]` for `t ~ Normal(τ, d²)`: `e^{−d²β²/2} cos(βτ)`.
pub fn gaussian_cosine_average(beta: f64, p: GaussianTimeParams) -> f64 {
    (-0.5 * (p.d * beta).powi(2)).exp() * (beta * p.tau).cos()
}

/// Gaussian-averaged per-ancilla score `−Σ_x w_x e^{−d²Δ²/2} cos(Δτ)`, `Δ = E − E_x`.
pub fn mean_score(w: &SpectralWeights, energy: f64, p: GaussianTimeParams) -> f64 {
    -w.iter().map(|(ex, wx)| wx * gaussian_cosine_average(energy - ex, p)).sum::<f64>()
}

/// Gaussian-averaged product score `(−1)^N Σ_x w_x [e^{−d²Δ²/2} cos(Δτ)]^N`.
pub fn mean_score_product(
    w: &SpectralWeights,
    energy: f64,
    p: GaussianTimeParams,
    ancillas: usize,
) -> Result<f64> {
    if ancillas == 0 {
        return Err(Error::InvalidParameter("need at least one ancilla".into()));
    }
    let sign = if ancillas.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign
        * w.iter()
            .map(|(ex, wx)| wx * gaussian_cosine_average(energy - ex, p).powi(ancillas as i32))
            .sum::<f64>())
}

/// Single-shot variance `1 − ⟨g⟩²` of the ±1-valued product observable.
pub fn variance_product(mean_g: f64) -> Result<f64> {
    if !(mean_g.abs() <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("mean {mean_g} outside [-1, 1]")));
    }
    Ok((1.0 - mean_g * mean_g).max(0.0))
}

/// Standard error `sqrt[(⟨x²⟩ − ⟨x⟩²)/n]`.
pub fn stderr(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("standard error needs at least 2 samples".into()));
    }
    let n = samples.len() as f64;
    // Shifting by the first sample keeps identical samples at exactly zero.
    let x0 = samples[0];
    let mean = samples.iter().map(|x| x - x0).sum::<f64>() / n;
    let mean_sq = samples.iter().map(|x| (x - x0).powi(2)).sum::<f64>() / n;
    Ok(((mean_sq - mean * mean).max(0.0) / n).sqrt())
}

fn product_weights(spins: usize, field: f64, angles: &[f64]) -> SpectralWeights {
    let levels = zeeman_levels(ZeemanParams { spins, field });
    let weights = (0..levels.len())
        .map(|s| {
            angles
                .iter()
                .enumerate()
                .map(|(q, theta)| {
                    let one = (s >> (spins - 1 - q)) & 1 == 1;
                    if one {
                        (theta / 2.0).sin().powi(2)
                    } else {
                        (theta / 2.0).cos().powi(2)
                    }
                })
                .product()
        })
        .collect();
    SpectralWeights { eigenvalues: levels, weights }
}

/// One-spin Zeeman response for `U3(θ)|0⟩`: weight `cos²(θ/2)` on `|0⟩`
/// (energy `−B`) and `sin²(θ/2)` on `|1⟩` (energy `+B`).
pub fn one_spin_curve(theta: f64, field: f64, energy: f64, p: GaussianTimeParams) -> f64 {
    mean_score(&product_weights(1, field, &[theta]), energy, p)
}

/// Two-spin Zeeman response for the product state `U3(θ₁)|0⟩ ⊗ U3(θ₂)|0⟩`.
pub fn two_spin_curve(
    theta1: f64,
    theta2: f64,
    field: f64,
    energy: f64,
    p: GaussianTimeParams,
) -> f64 {
    mean_score(&product_weights(2, field, &[theta1, theta2]), energy, p)
}

/// Entangled two-spin inputs accepted by [`bell_curve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BellKind {
    Bell(BellLabel),
    Mix { family: BellFamily, alpha: f64 },
}

impl BellKind {
    pub fn spec(self) -> PsiSpec {
        match self {
            BellKind::Bell(label) => PsiSpec::Bell(label),
            BellKind::Mix { family, alpha } => PsiSpec::Mix { family, alpha },
        }
    }

    /// Level weights over `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn weights(self) -> [f64; 4] {
        match self {
            BellKind::Bell(BellLabel::PhiPlus | BellLabel::PhiMinus) => [0.5, 0.0, 0.0, 0.5],
            BellKind::Bell(BellLabel::PsiPlus | BellLabel::PsiMinus) => [0.0, 0.5, 0.5, 0.0],
            BellKind::Mix { family: BellFamily::Phi, alpha } => {
                [alpha.cos().powi(2), 0.0, 0.0, alpha.sin().powi(2)]
            }
            BellKind::Mix { family: BellFamily::Psi, alpha } => {
                let s2 = (2.0 * alpha).sin();
                [0.0, 0.5 * (1.0 + s2), 0.5 * (1.0 - s2), 0.0]
            }
        }
    }
}

/// Two-spin Zeeman response for Bell and partially entangled inputs.
pub fn bell_curve(kind: BellKind, field: f64, energy: f64, p: GaussianTimeParams) -> f64 {
    let w = SpectralWeights {
        eigenvalues: zeeman_levels(ZeemanParams { spins: 2, field }),
        weights: kind.weights().to_vec(),
    };
    mean_score(&w, energy, p)
}
