//! Peak extraction from a scanned `−h̄(E)` curve.
//!
//! With a known filter the curve is correlated with the single-level response
//! `k(Δ) = e^{−d²Δ²/2} cos(Δτ)`. Maxima of the correlation locate peaks; the
//! level weight `P(x)` is then fitted by inverse-variance weighted least
//! squares of `P·k(E − E_peak)` over the kernel support, which pools every
//! grid point the peak touches instead of reading off a single noisy value.

use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use super::dataset::RideRecord;
use super::scan::ScanResult;
use crate::oracle::{gaussian_cosine_average, GaussianTimeParams};

/// Kernel support in units of `1/d`; `e^{−8}` is below any useful weight.
const SUPPORT_WIDTHS: f64 = 4.0;
/// Stderr floor, as a fraction of the largest stderr in the window, added in
/// quadrature so exact-zero errors cannot dominate an off-centre fit.
const RELATIVE_FLOOR: f64 = 0.1;
const ABSOLUTE_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakOptions {
    pub threshold: f64,
    pub merge_radius: f64,
    /// Minimum `height / stderr` for a maximum to count.
    pub significance: f64,
    /// Filter parameters for matched filtering; `None` uses the raw curve.
    pub kernel: Option<GaussianTimeParams>,
}

impl PeakOptions {
    pub const DEFAULT_THRESHOLD: f64 = 0.1;
    pub const DEFAULT_SIGNIFICANCE: f64 = 4.0;

    /// Threshold 0.1, merge radius `3/d`, matched filtering with `p`.
    pub fn for_filter(p: GaussianTimeParams) -> Self {
        Self {
            threshold: Self::DEFAULT_THRESHOLD,
            merge_radius: 3.0 / p.d,
            significance: Self::DEFAULT_SIGNIFICANCE,
            kernel: Some(p),
        }
    }

    /// Raw-curve detection with an explicit merge radius.
    pub fn raw(merge_radius: f64) -> Self {
        Self {
            threshold: Self::DEFAULT_THRESHOLD,
            merge_radius,
            significance: Self::DEFAULT_SIGNIFICANCE,
            kernel: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Location of the maximum, refined below grid resolution when a
    /// filter kernel is known.
    pub energy: f64,
    /// Height-weighted mean energy over the half-maximum region.
    pub centroid: f64,
    /// Estimated level weight.
    pub height: f64,
    pub stderr: f64,
    /// Full width at half maximum on the grid.
    pub width: f64,
}

/// Grid points within the kernel support around `center`.
fn window(energies: &[f64], center: f64, support: f64) -> std::ops::Range<usize> {
    let lo = energies.partition_point(|&e| e < center - support);
    let hi = energies.partition_point(|&e| e <= center + support);
    lo..hi
}

/// Uniformly weighted matched-filter amplitude `Σky/Σk²` and its stderr at
/// every grid point. Used to find and locate peaks.
pub fn filtered_curve(result: &ScanResult, p: GaussianTimeParams) -> (Vec<f64>, Vec<f64>) {
    result
        .energies
        .iter()
        .map(|&center| amplitude(result, p, center, |_| 1.0))
        .unzip()
}

/// Inverse-variance weighted amplitude of a single-level response centred at
/// an arbitrary energy. Only well-conditioned when `center` sits on a peak.
pub fn weighted_amplitude(result: &ScanResult, p: GaussianTimeParams, center: f64) -> (f64, f64) {
    let largest = result.stderr[window(&result.energies, center, SUPPORT_WIDTHS / p.d)]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let floor = (RELATIVE_FLOOR * largest).max(ABSOLUTE_FLOOR);
    amplitude(result, p, center, |se| 1.0 / (se * se + floor * floor))
}

fn amplitude(
    result: &ScanResult,
    p: GaussianTimeParams,
    center: f64,
    weight: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let (mut num, mut den, mut var) = (0.0, 0.0, 0.0);
    for i in window(&result.energies, center, SUPPORT_WIDTHS / p.d) {
        let k = gaussian_cosine_average(result.energies[i] - center, p);
        let se = result.stderr[i];
        let w = weight(se);
        num += w * k * result.mean_neg_h[i];
        den += w * k * k;
        var += (w * k * se).powi(2);
    }
    if den > 0.0 {
        (num / den, var.sqrt() / den)
    } else {
        (0.0, 0.0)
    }
}

/// Vertex of the parabola through the maximum and its grid neighbours.
fn refine(energies: &[f64], curve: &[f64], j: usize) -> f64 {
    if j == 0 || j + 1 == curve.len() {
        return energies[j];
    }
    let (a, b, c) = (curve[j - 1], curve[j], curve[j + 1]);
    let curvature = a - 2.0 * b + c;
    if curvature >= 0.0 {
        return energies[j];
    }
    let step = 0.5 * (energies[j + 1] - energies[j - 1]);
    energies[j] + (0.5 * (a - c) / curvature).clamp(-0.5, 0.5) * step
}

pub fn detect_peaks(result: &ScanResult, opts: &PeakOptions) -> Vec<Peak> {
    let n = result.energies.len();
    if n == 0 {
        return Vec::new();
    }
    let (curve, err) = match opts.kernel {
        Some(p) => filtered_curve(result, p),
        None => (result.mean_neg_h.clone(), result.stderr.clone()),
    };
    let e = &result.energies;

    let candidates: Vec<usize> = (0..n)
        .filter(|&j| {
            let left = j == 0 || curve[j] >= curve[j - 1];
            let right = j + 1 == n || curve[j] > curve[j + 1];
            left && right && curve[j] > opts.threshold && curve[j] > opts.significance * err[j]
        })
        .collect();

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for j in candidates {
        match clusters.last_mut() {
            Some(c) if e[j] - e[*c.last().unwrap()] <= opts.merge_radius => c.push(j),
            _ => clusters.push(vec![j]),
        }
    }

    clusters
        .into_iter()
        .map(|c| {
            let top = c.iter().copied().fold(c[0], |a, b| if curve[b] > curve[a] { b } else { a });
            let half = 0.5 * curve[top];
            let mut lo = top;
            while lo > 0 && curve[lo - 1] >= half {
                lo -= 1;
            }
            let mut hi = top;
            while hi + 1 < n && curve[hi + 1] >= half {
                hi += 1;
            }
            let mass: f64 = curve[lo..=hi].iter().sum();
            let moment: f64 = (lo..=hi).map(|i| e[i] * curve[i]).sum();
            let (energy, height, stderr) = match opts.kernel {
                Some(p) => {
                    let at = refine(e, &curve, top);
                    let (h, se) = weighted_amplitude(result, p, at);
                    (at, h, se)
                }
                None => (e[top], curve[top], err[top]),
            };
            Peak { energy, centroid: moment / mass, height, stderr, width: e[hi] - e[lo] }
        })
        .collect()
}

/// Refits peak energies and heights against the individual rides.
///
/// Each ride with trial energy `E` and times `t_k` has the noise-free response
/// `−h = Σ_x P_x (1/N) Σ_k cos((E − E_x) t_k)`, so with the times known the
/// level weights follow from a Levenberg–Marquardt fit over every ride inside
/// the kernel support of some peak. Peaks the fit cannot improve, or whose
/// energy would move by more than `1/d`, keep their curve estimates. Peaks
/// whose fitted height fails the threshold or significance test are dropped.
pub fn fit_peaks(records: &[RideRecord], peaks: &[Peak], opts: &PeakOptions) -> Vec<Peak> {
    let Some(p) = opts.kernel else {
        return peaks.to_vec();
    };
    let k = peaks.len();
    if k == 0 {
        return Vec::new();
    }
    let support = SUPPORT_WIDTHS / p.d;
    let rides: Vec<&RideRecord> = records
        .iter()
        .filter(|r| peaks.iter().any(|pk| (r.energy - pk.energy).abs() <= support))
        .collect();
    if rides.len() <= 2 * k {
        return peaks.to_vec();
    }
    let y: DVector<f64> = DVector::from_iterator(rides.len(), rides.iter().map(|r| -r.score()));

    let model = |theta: &DVector<f64>| -> (DVector<f64>, DMatrix<f64>) {
        let mut f = DVector::zeros(rides.len());
        let mut jac = DMatrix::zeros(rides.len(), 2 * k);
        for (i, r) in rides.iter().enumerate() {
            let inv_n = 1.0 / r.times.len() as f64;
            for j in 0..k {
                let (mut c, mut dc) = (0.0, 0.0);
                for &t in &r.times {
                    let phase = (r.energy - theta[k + j]) * t;
                    c += phase.cos();
                    dc += t * phase.sin();
                }
                f[i] += theta[j] * c * inv_n;
                jac[(i, j)] = c * inv_n;
                jac[(i, k + j)] = theta[j] * dc * inv_n;
            }
        }
        (f, jac)
    };

    let mut theta = DVector::from_iterator(
        2 * k,
        peaks.iter().map(|pk| pk.height).chain(peaks.iter().map(|pk| pk.energy)),
    );
    let (mut f, mut jac) = model(&theta);
    let mut rss = (&y - &f).norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..50 {
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * (&y - &f);
        let mut damped = jtj.clone();
        for d in 0..2 * k {
            damped[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
        }
        let Some(step) = damped.cholesky().map(|c| c.solve(&g)) else {
            lambda *= 10.0;
            continue;
        };
        let trial = &theta + &step;
        let (tf, tj) = model(&trial);
        let trial_rss = (&y - &tf).norm_squared();
        if trial_rss.is_finite() && trial_rss < rss {
            let converged = rss - trial_rss <= 1e-15 * rss.max(1e-300);
            theta = trial;
            f = tf;
            jac = tj;
            rss = trial_rss;
            lambda = (lambda * 0.3).max(1e-12);
            if converged {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    let dof = (rides.len() - 2 * k) as f64;
    let cov = (jac.transpose() * &jac).try_inverse();
    peaks
        .iter()
        .enumerate()
        .map(|(j, pk)| {
            let (h, e) = (theta[j], theta[k + j]);
            let var = cov.as_ref().map(|c| c[(j, j)] * rss / dof);
            match var {
                Some(v) if h.is_finite() && v.is_finite() && (e - pk.energy).abs() <= 1.0 / p.d => {
                    Peak { energy: e, height: h, stderr: v.max(0.0).sqrt(), ..*pk }
                }
                _ => *pk,
            }
        })
        .filter(|pk| pk.height > opts.threshold && pk.height > opts.significance * pk.stderr)
        .collect()
}
