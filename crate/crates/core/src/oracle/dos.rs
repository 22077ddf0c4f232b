//! Gaussian-broadened density of states of the two-spin Zeeman model, with
//! level weights ¼, ½, ¼ at −2B, 0, +2B, and the entropy / inverse
//! temperature derived from it at τ = 0.

use std::f64::consts::{LN_2, PI};

use super::{gaussian_cosine_average, GaussianTimeParams};

const LEVEL_WEIGHTS: [f64; 3] = [0.25, 0.5, 0.25];

fn level_offsets(energy: f64, field: f64) -> [f64; 3] {
    [energy + 2.0 * field, energy, energy - 2.0 * field]
}

/// `Ω(E) = (d/√(2π)) Σ_x w_x cos(Δ_x τ) e^{−d²Δ_x²/2}`; integrates to 1 at τ = 0.
pub fn dos(energy: f64, field: f64, p: GaussianTimeParams) -> f64 {
    let prefactor = p.d / (2.0 * PI).sqrt();
    prefactor
        * LEVEL_WEIGHTS
            .iter()
            .zip(level_offsets(energy, field))
            .map(|(w, delta)| w * gaussian_cosine_average(delta, p))
            .sum::<f64>()
}

/// τ = 0 compact form `(d/√(2π))·½e^{−d²E²/2}(e^{−2d²B²} cosh(2d²EB) + 1)`.
pub fn dos_compact(energy: f64, field: f64, d: f64) -> f64 {
    let d2 = d * d;
    d / (2.0 * PI).sqrt()
        * 0.5
        * (-0.5 * d2 * energy * energy).exp()
        * ((-2.0 * d2 * field * field).exp() * (2.0 * d2 * energy * field).cosh() + 1.0)
}

/// Exponents `−d²Δ_x²/2` for the three levels.
fn exponents(energy: f64, field: f64, d: f64) -> [f64; 3] {
    level_offsets(energy, field).map(|delta| -0.5 * (d * delta).powi(2))
}

/// `S/k_B = ln Σ_x w_x e^{−d²Δ_x²/2}` (no `d/√(2π)` prefactor), evaluated
/// with a shifted log-sum-exp so large `d·B` cannot overflow.
pub fn entropy(energy: f64, field: f64, d: f64) -> f64 {
    let a = exponents(energy, field, d);
    let top = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = LEVEL_WEIGHTS.iter().zip(a).map(|(w, x)| w * (x - top).exp()).sum();
    top + sum.ln()
}

/// `S/k_B = −ln2 − d²E²/2 + ln[e^{−2d²B²} cosh(2d²BE) + 1]`. Overflows once
/// `2d²|BE|` passes ~710; [`entropy`] is the safe evaluation.
pub fn entropy_compact(energy: f64, field: f64, d: f64) -> f64 {
    let d2 = d * d;
    -LN_2 - 0.5 * d2 * energy * energy
        + ((-2.0 * d2 * field * field).exp() * (2.0 * d2 * field * energy).cosh() + 1.0).ln()
}

/// `β = ∂S/∂E` as the weighted ratio
/// `Σ_x w_x e^{−d²Δ_x²/2}(−d²Δ_x) / Σ_x w_x e^{−d²Δ_x²/2}`.
pub fn beta(energy: f64, field: f64, d: f64) -> f64 {
    let a = exponents(energy, field, d);
    let top = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((w, x), delta) in LEVEL_WEIGHTS.iter().zip(a).zip(level_offsets(energy, field)) {
        let g = w * (x - top).exp();
        num += g * (-d * d * delta);
        den += g;
    }
    num / den
}

#[derive(Clone, Debug, PartialEq)]
pub struct DosCurve {
    pub energies: Vec<f64>,
    /// Ω at τ = 0.
    pub omega: Vec<f64>,
    /// S / k_B.
    pub entropy: Vec<f64>,
    pub beta: Vec<f64>,
}

pub fn entropy_and_beta(grid: &[f64], field: f64, d: f64) -> DosCurve {
    let p = GaussianTimeParams { tau: 0.0, d };
    DosCurve {
        energies: grid.to_vec(),
        omega: grid.iter().map(|&e| dos(e, field, p)).collect(),
        entropy: grid.iter().map(|&e| entropy(e, field, d)).collect(),
        beta: grid.iter().map(|&e| beta(e, field, d)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    }

    #[test]
    fn omega_is_even() {
        let p = GaussianTimeParams { tau: 3.0, d: 2.5 };
        for e in grid(-3.0, 3.0, 300) {
            assert_abs_diff_eq!(dos(e, 0.7, p), dos(-e, 0.7, p), epsilon = 1e-14);
        }
    }

    #[test]
    fn compact_form_identity() {
        for (b, d) in [(0.7, 10.0), (1.0, 3.0), (0.2, 7.0)] {
            let p = GaussianTimeParams { tau: 0.0, d };
            for e in grid(-3.0, 3.0, 10_000) {
                assert_abs_diff_eq!(dos(e, b, p), dos_compact(e, b, d), epsilon = 1e-12);
                assert_abs_diff_eq!(entropy(e, b, d), entropy_compact(e, b, d), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn omega_integrates_to_one() {
        let (b, d): (f64, f64) = (0.7, 10.0);
        let half = 2.0 * b + 10.0 / d;
        let step = 1e-3 / d;
        let n = (2.0 * half / step).round() as usize;
        let p = GaussianTimeParams { tau: 0.0, d };
        let vals: Vec<f64> = (0..=n).map(|i| dos(-half + i as f64 * step, b, p)).collect();
        let integral = step * (vals.iter().sum::<f64>() - 0.5 * (vals[0] + vals[n]));
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn beta_matches_finite_difference() {
        let (b, d) = (0.7, 3.0);
        let h = 1e-5;
        assert_eq!(beta(0.0, b, d), 0.0);
        for e in grid(-3.0, 3.0, 600) {
            let fd = (entropy(e + h, b, d) - entropy(e - h, b, d)) / (2.0 * h);
            assert_abs_diff_eq!(beta(e, b, d), fd, epsilon = 1e-6);
            assert_abs_diff_eq!(entropy(e, b, d), entropy(-e, b, d), epsilon = 1e-12);
        }
    }

    #[test]
    fn large_arguments_stay_finite() {
        let c = entropy_and_beta(&[-5.0, 0.0, 5.0], 1.0, 50.0);
        assert!(c.entropy.iter().all(|s| s.is_finite()));
        assert!(c.beta.iter().all(|x| x.is_finite()));
        assert_abs_diff_eq!(c.beta[0], -c.beta[2], epsilon = 1e-9);
    }
}
