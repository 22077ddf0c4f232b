//! Dense Hermitian targets, their spectra, and exact evolution unitaries.
//!
//! Energies and times are in reduced units (μ_B = ħ = 1).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{unitarity_defect, C64, MAX_QUBITS};

const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-9;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<C64>,
    label: String,
}

impl HermitianOperator {
    /// Validates shape (square, power-of-two dimension) and hermiticity to 1e-12.
    pub fn new(entries: DMatrix<C64>, label: impl Into<String>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        let dim = entries.nrows();
        if dim == 0 || !dim.is_power_of_two() || dim.trailing_zeros() as usize > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "operator dimension {dim} is not a power of two within the qubit cap"
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("operator has non-finite entries".into()));
        }
        let deviation = hermitian_defect(&entries);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { entries, label: label.into() })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of qubits the operator acts on.
    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }
}

fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeemanParams {
    pub spins: usize,
    pub field: f64,
}

/// `−B Σ_i σ_z^{(i)}` on `spins` qubits. Diagonal; the entry for bitstring `s`
/// is `−B·(#zeros(s) − #ones(s))`.
pub fn zeeman(params: ZeemanParams) -> Result<HermitianOperator> {
    let ZeemanParams { spins, field } = params;
    if spins == 0 || spins > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!("spin count {spins} outside 1..={MAX_QUBITS}")));
    }
    if !field.is_finite() {
        return Err(Error::InvalidParameter("field must be finite".into()));
    }
    let levels = zeeman_levels(params);
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        levels.len(),
        levels.iter().map(|&e| C64::new(e, 0.0)),
    ));
    HermitianOperator::new(m, format!("zeeman(M={spins}, B={field})"))
}

/// Diagonal of the Zeeman Hamiltonian in computational-basis order.
pub fn zeeman_levels(params: ZeemanParams) -> Vec<f64> {
    let ZeemanParams { spins, field } = params;
    (0..1usize << spins)
        .map(|s| {
            let ones = s.count_ones() as f64;
            let zeros = spins as f64 - ones;
            -field * (zeros - ones)
        })
        .collect()
}

/// Eigenpairs of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Column `x` is the eigenvector `|x⟩`.
    eigenvectors: DMatrix<C64>,
    degeneracy_groups: Vec<Vec<usize>>,
}

impl SpectralDecomposition {
    /// Cyclic Jacobi diagonalization; diagonal inputs skip straight to the
    /// computational basis.
    pub fn of(op: &HermitianOperator) -> Result<Self> {
        let (values, vectors) = if is_diagonal(op.entries()) {
            let n = op.dim();
            let values = (0..n).map(|i| op.entries()[(i, i)].re).collect();
            (values, DMatrix::identity(n, n))
        } else {
            jacobi_eigh(op.entries())?
        };
        Ok(Self::sorted(values, vectors))
    }

    /// Builds a decomposition from explicit eigenpairs (columns of `eigenvectors`).
    /// The eigenvector matrix must be unitary to 1e-10.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<C64>) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: eigenvectors.nrows() });
        }
        let deviation = unitarity_defect(&eigenvectors);
        if deviation > 1e-10 {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self::sorted(eigenvalues, eigenvectors))
    }

    fn sorted(values: Vec<f64>, vectors: DMatrix<C64>) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        // Stable sort: ties keep their original index order.
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);

        let mut degeneracy_groups: Vec<Vec<usize>> = Vec::new();
        for (i, &e) in eigenvalues.iter().enumerate() {
            match degeneracy_groups.last_mut() {
                Some(g) if (e - eigenvalues[g[0]]).abs() < DEGENERACY_TOL => g.push(i),
                _ => degeneracy_groups.push(vec![i]),
            }
        }
        Self { eigenvalues, eigenvectors, degeneracy_groups }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, x: usize) -> Vec<C64> {
        self.eigenvectors.column(x).iter().copied().collect()
    }

    pub fn degeneracy_groups(&self) -> &[Vec<usize>] {
        &self.degeneracy_groups
    }

    /// `V diag(e^{−iE_x t}) V†`.
    pub fn evolution_unitary(&self, t: f64) -> DMatrix<C64> {
        let n = self.dim();
        let phases: Vec<C64> =
            self.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect();
        let v = &self.eigenvectors;
        DMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|x| v[(r, x)] * phases[x] * v[(c, x)].conj()).sum()
        })
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let n = self.dim();
        let v = &self.eigenvectors;
        DMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|x| v[(r, x)] * self.eigenvalues[x] * v[(c, x)].conj()).sum()
        })
    }
}

fn is_diagonal(m: &DMatrix<C64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)))
}

fn off_diagonal_norm(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic complex Jacobi. Each rotation first removes the phase of `a_pq`
/// with `diag(1, e^{−iφ})`, then applies the real symmetric Jacobi rotation.
fn jacobi_eigh(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a.norm().max(1.0);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off < JACOBI_TOL * scale {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r < f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                // A ← A G
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                // A ← G† A
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                // V ← V G
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }
    Ok(((0..n).map(|i| a[(i, i)].re).collect(), v))
}
