//! Dense state vectors and the handful of gates the Rodeo circuit needs.
//!
//! Qubit 0 is the leftmost ket symbol, i.e. the most significant bit of the
//! basis index. With `n` qubits, qubit `q` lives at bit `n - 1 - q`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hard cap on register size for the dense representation.
pub const MAX_QUBITS: usize = 20;

const UNITARY_TOL: f64 = 1e-10;

/// A 2×2 single-qubit gate, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate2 {
    pub entries: [[C64; 2]; 2],
}

impl Gate2 {
    pub const fn new(entries: [[C64; 2]; 2]) -> Self {
        Self { entries }
    }

    pub fn identity() -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self::new([[l, o], [o, l]])
    }

    pub fn pauli_x() -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self::new([[o, l], [l, o]])
    }

    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new([[h, h], [h, -h]])
    }

    /// Phase shift `|0⟩⟨0| + e^{iφ}|1⟩⟨1|`.
    pub fn phase(phi: f64) -> Self {
        let o = C64::new(0.0, 0.0);
        Self::new([[C64::new(1.0, 0.0), o], [o, C64::from_polar(1.0, phi)]])
    }

    pub fn adjoint(&self) -> Self {
        let e = &self.entries;
        Self::new([[e[0][0].conj(), e[1][0].conj()], [e[0][1].conj(), e[1][1].conj()]])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self::new(out)
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let id = Self::identity();
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((p.entries[i][j] - id.entries[i][j]).norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let e = &self.entries;
        [e[0][0] * v[0] + e[0][1] * v[1], e[1][0] * v[0] + e[1][1] * v[1]]
    }
}

/// General single-qubit rotation
/// `[[cos(θ/2), −e^{iδ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(φ+δ)} cos(θ/2)]]`.
pub fn u3(theta: f64, phi: f64, delta: f64) -> Gate2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Gate2::new([
        [C64::new(c, 0.0), -C64::from_polar(s, delta)],
        [C64::from_polar(s, phi), C64::from_polar(c, phi + delta)],
    ])
}

/// Largest entrywise deviation of `U†U` from the identity for a dense matrix.
pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let p = u.adjoint() * u;
    let n = p.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// A measured computational-basis outcome, printed in qubit order (qubit 0 first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bitstring {
    index: usize,
    len: usize,
}

impl Bitstring {
    pub fn new(index: usize, len: usize) -> Self {
        debug_assert!(len >= usize::BITS as usize || index < (1usize << len));
        Self { index, len }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Value of qubit `q` (true = |1⟩).
    pub fn bit(&self, q: usize) -> bool {
        (self.index >> (self.len - 1 - q)) & 1 == 1
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len {
            f.write_str(if self.bit(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_cap(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: index });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// Parses a ket label such as `"0110"` (qubit 0 first).
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        let mut index = 0usize;
        for ch in bits.chars() {
            index = (index << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(Error::InvalidState(format!("bad bit {other:?} in {bits:?}")))
                    }
                };
        }
        Self::basis(bits.len(), index)
    }

    /// Wraps raw amplitudes; the length must be a power of two and the
    /// vector normalized to 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!("length {dim} is not a power of two")));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_cap(num_qubits)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let state = Self { num_qubits, amplitudes };
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(state)
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but rescales to unit norm first.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite norm".into()));
        }
        Self::from_amplitudes(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Kronecker product `self ⊗ other`; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_cap(num_qubits)?;
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(StateVector { num_qubits, amplitudes })
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, num_qubits: self.num_qubits });
        }
        Ok(1usize << (self.num_qubits - 1 - qubit))
    }

    pub fn apply_single_qubit_gate(&mut self, gate: &Gate2, qubit: usize) -> Result<()> {
        let mask = self.mask(qubit)?;
        for i in 0..self.dim() {
            if i & mask == 0 {
                let j = i | mask;
                let [a, b] = gate.apply([self.amplitudes[i], self.amplitudes[j]]);
                self.amplitudes[i] = a;
                self.amplitudes[j] = b;
            }
        }
        Ok(())
    }

    /// Multiplies every component with `qubit = 1` by `e^{iφ}`.
    pub fn apply_phase(&mut self, qubit: usize, phase: f64) -> Result<()> {
        let mask = self.mask(qubit)?;
        let factor = C64::from_polar(1.0, phase);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask != 0 {
                *a *= factor;
            }
        }
        Ok(())
    }

    /// Applies `u` to `targets` (first target = most significant index bit of
    /// `u`) on the branch where `control` is |1⟩. `u` must be unitary to 1e-10.
    pub fn apply_controlled_unitary(
        &mut self,
        control: usize,
        targets: &[usize],
        u: &DMatrix<C64>,
    ) -> Result<()> {
        let deviation = if u.is_square() { unitarity_defect(u) } else { f64::INFINITY };
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        self.apply_controlled_unchecked(control, targets, u)
    }

    pub(crate) fn apply_controlled_unchecked(
        &mut self,
        control: usize,
        targets: &[usize],
        u: &DMatrix<C64>,
    ) -> Result<()> {
        let cmask = self.mask(control)?;
        let mut tmasks = Vec::with_capacity(targets.len());
        for &t in targets {
            if t == control {
                return Err(Error::OverlappingQubits(t));
            }
            let m = self.mask(t)?;
            if tmasks.contains(&m) {
                return Err(Error::DuplicateTarget(t));
            }
            tmasks.push(m);
        }
        let sub = 1usize << targets.len();
        if u.nrows() != sub || u.ncols() != sub {
            return Err(Error::DimensionMismatch { expected: sub, got: u.nrows() });
        }
        let k = targets.len();
        let offsets: Vec<usize> = (0..sub)
            .map(|a| {
                (0..k)
                    .filter(|&j| (a >> (k - 1 - j)) & 1 == 1)
                    .fold(0, |acc, j| acc | tmasks[j])
            })
            .collect();
        let all_targets: usize = tmasks.iter().fold(0, |acc, m| acc | m);

        let mut gathered = vec![C64::new(0.0, 0.0); sub];
        for base in 0..self.dim() {
            if base & cmask == 0 || base & all_targets != 0 {
                continue;
            }
            for (g, &off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base | off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (col, g) in gathered.iter().enumerate() {
                    acc += u[(row, col)] * g;
                }
                self.amplitudes[base | off] = acc;
            }
        }
        Ok(())
    }

    /// `⟨σ_z⟩` on one qubit, with |0⟩ ↔ +1.
    pub fn expect_pauli_z(&self, qubit: usize) -> Result<f64> {
        let mask = self.mask(qubit)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// `⟨σ_z ⊗ … ⊗ σ_z⟩` over `qubits`, identity elsewhere.
    pub fn expect_pauli_z_product(&self, qubits: &[usize]) -> Result<f64> {
        let mut mask = 0usize;
        for &q in qubits {
            mask |= self.mask(q)?;
        }
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if (i & mask).count_ones().is_multiple_of(2) {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum())
    }

    /// `⟨σ_x⟩` on one qubit.
    pub fn expect_pauli_x(&self, qubit: usize) -> Result<f64> {
        let mask = self.mask(qubit)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(i, a)| 2.0 * (a.conj() * self.amplitudes[i | mask]).re)
            .sum())
    }

    /// Probability that `qubit` reads |1⟩.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        let mask = self.mask(qubit)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Draws one computational-basis outcome with probability `|amplitude|²`.
    pub fn sample_bitstring<R: Rng + ?Sized>(&self, rng: &mut R) -> Bitstring {
        let u: f64 = rng.random::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                last_nonzero = i;
            }
            acc += p;
            if u < acc {
                return Bitstring::new(i, self.num_qubits);
            }
        }
        Bitstring::new(last_nonzero, self.num_qubits)
    }

    /// Cumulative-table sampler for drawing many shots from the same state.
    pub fn sampler(&self) -> BasisSampler {
        let mut cumulative = Vec::with_capacity(self.dim());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        BasisSampler { cumulative, num_qubits: self.num_qubits }
    }
}

#[derive(Clone, Debug)]
pub struct BasisSampler {
    cumulative: Vec<f64>,
    num_qubits: usize,
}

impl BasisSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Bitstring {
        let total = *self.cumulative.last().expect("non-empty state");
        let u = rng.random::<f64>() * total;
        let mut idx = self.cumulative.partition_point(|&c| c <= u);
        // Guard against landing on a trailing zero-probability entry through rounding.
        if idx >= self.cumulative.len() {
            idx = self.cumulative.len() - 1;
        }
        while idx > 0 && self.cumulative[idx] == self.cumulative[idx - 1] {
            idx -= 1;
        }
        Bitstring::new(idx, self.num_qubits)
    }
}

fn check_cap(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_QUBITS {
        return Err(Error::QubitCap { requested: num_qubits, cap: MAX_QUBITS });
    }
    Ok(())
}
