//! One Rodeo ride: ancillas in |−⟩, a controlled-evolution-plus-phase cycle per
//! ancilla, final Hadamards, then readout.
//!
//! Register layout is `|a_0 … a_{N−1}, s_0 … s_{M−1}⟩`: ancillas first.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SpectralDecomposition;
use crate::qcore::{Gate2, StateVector, MAX_QUBITS};

/// Inputs for a single ride.
#[derive(Clone, Copy, Debug)]
pub struct RidePlan<'a> {
    trial_energy: f64,
    times: &'a [f64],
    hamiltonian: &'a SpectralDecomposition,
    initial_state: &'a StateVector,
}

impl<'a> RidePlan<'a> {
    /// One ancilla per entry of `times`.
    pub fn new(
        trial_energy: f64,
        times: &'a [f64],
        hamiltonian: &'a SpectralDecomposition,
        initial_state: &'a StateVector,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidParameter("a ride needs at least one ancilla".into()));
        }
        if initial_state.dim() != hamiltonian.dim() {
            return Err(Error::DimensionMismatch {
                expected: hamiltonian.dim(),
                got: initial_state.dim(),
            });
        }
        let norm_sqr = initial_state.norm_sqr();
        if (norm_sqr - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm_sqr });
        }
        if !trial_energy.is_finite() || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("energy and times must be finite".into()));
        }
        let total = times.len() + initial_state.num_qubits();
        if total > MAX_QUBITS {
            return Err(Error::QubitCap { requested: total, cap: MAX_QUBITS });
        }
        Ok(Self { trial_energy, times, hamiltonian, initial_state })
    }

    pub fn ancillas(&self) -> usize {
        self.times.len()
    }

    pub fn system_qubits(&self) -> usize {
        self.initial_state.num_qubits()
    }

    pub fn trial_energy(&self) -> f64 {
        self.trial_energy
    }

    pub fn times(&self) -> &[f64] {
        self.times
    }

    pub fn hamiltonian(&self) -> &SpectralDecomposition {
        self.hamiltonian
    }

    pub fn initial_state(&self) -> &StateVector {
        self.initial_state
    }
}

#[derive(Clone, Debug)]
pub struct RideOutcome {
    pub final_state: StateVector,
    /// `⟨σ_z⟩` of each ancilla.
    pub per_ancilla_z: Vec<f64>,
    /// `⟨σ_z^{⊗N} ⊗ 1^{⊗M}⟩`.
    pub product_z: f64,
    /// Probability that every ancilla reads |1⟩.
    pub success_prob: f64,
}

impl RideOutcome {
    pub fn ancillas(&self) -> usize {
        self.per_ancilla_z.len()
    }

    /// Per-ancilla mean `h = (1/N) Σ_j ⟨σ_z⟩_j`.
    pub fn score_mean(&self) -> f64 {
        self.per_ancilla_z.iter().sum::<f64>() / self.per_ancilla_z.len() as f64
    }

    /// Product observable `g(E, N)`.
    pub fn score_product(&self) -> f64 {
        self.product_z
    }

    pub fn success_probability(&self) -> f64 {
        self.success_prob
    }
}

/// Measured counts for one ancilla (or for the product parity): `n_up` are
/// |0⟩ (σ_z = +1) outcomes, `n_down` are |1⟩.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub n_up: u64,
    pub n_down: u64,
}

impl ShotCounts {
    pub fn shots(&self) -> u64 {
        self.n_up + self.n_down
    }

    /// `(n_up − n_down) / (n_up + n_down)`.
    pub fn expectation(&self) -> f64 {
        (self.n_up as f64 - self.n_down as f64) / self.shots() as f64
    }
}

/// `(X then H)|0⟩ = |−⟩` on each of `ancillas` qubits, tensored with `system`.
pub fn prepare_rider(system: &StateVector, ancillas: usize) -> Result<StateVector> {
    if ancillas == 0 {
        return Err(Error::InvalidParameter("a ride needs at least one ancilla".into()));
    }
    let total = ancillas + system.num_qubits();
    if total > MAX_QUBITS {
        return Err(Error::QubitCap { requested: total, cap: MAX_QUBITS });
    }
    let mut register = StateVector::zero(ancillas)?;
    for k in 0..ancillas {
        register.apply_single_qubit_gate(&Gate2::pauli_x(), k)?;
        register.apply_single_qubit_gate(&Gate2::hadamard(), k)?;
    }
    register.tensor(system)
}

/// Controlled `e^{−iHt_k}` from ancilla `k` onto the system register, then
/// the phase `e^{iEt_k}` on ancilla `k`.
pub fn bull_cycle(state: &mut StateVector, plan: &RidePlan<'_>, k: usize) -> Result<()> {
    let n = plan.ancillas();
    if k >= n {
        return Err(Error::QubitOutOfRange { index: k, num_qubits: n });
    }
    let m = plan.system_qubits();
    if state.num_qubits() != n + m {
        return Err(Error::DimensionMismatch { expected: n + m, got: state.num_qubits() });
    }
    let t = plan.times[k];
    let u = plan.hamiltonian.evolution_unitary(t);
    let targets: Vec<usize> = (n..n + m).collect();
    state.apply_controlled_unchecked(k, &targets, &u)?;
    state.apply_phase(k, plan.trial_energy * t)
}

pub fn ride(plan: &RidePlan<'_>) -> Result<RideOutcome> {
    let n = plan.ancillas();
    let mut state = prepare_rider(plan.initial_state, n)?;
    for k in 0..n {
        bull_cycle(&mut state, plan, k)?;
    }
    for k in 0..n {
        state.apply_single_qubit_gate(&Gate2::hadamard(), k)?;
    }
    let per_ancilla_z = (0..n).map(|k| state.expect_pauli_z(k)).collect::<Result<Vec<_>>>()?;
    let ancilla_qubits: Vec<usize> = (0..n).collect();
    let product_z = state.expect_pauli_z_product(&ancilla_qubits)?;
    let success_prob = success_probability(&state, n);
    Ok(RideOutcome { final_state: state, per_ancilla_z, product_z, success_prob })
}

/// Sum of `|amplitude|²` over components whose leading `ancillas` bits are all 1.
pub fn success_probability(state: &StateVector, ancillas: usize) -> f64 {
    let m = state.num_qubits() - ancillas;
    let first = ((1usize << ancillas) - 1) << m;
    state.amplitudes()[first..].iter().map(|a| a.norm_sqr()).sum::<f64>().clamp(0.0, 1.0)
}

/// Samples `shots` full-register bitstrings and tallies each ancilla.
pub fn shot_estimate<R: Rng + ?Sized>(
    outcome: &RideOutcome,
    shots: u64,
    rng: &mut R,
) -> Result<Vec<ShotCounts>> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let n = outcome.ancillas();
    let sampler = outcome.final_state.sampler();
    let mut counts = vec![ShotCounts::default(); n];
    for _ in 0..shots {
        let bits = sampler.sample(rng);
        for (k, c) in counts.iter_mut().enumerate() {
            if bits.bit(k) {
                c.n_down += 1;
            } else {
                c.n_up += 1;
            }
        }
    }
    Ok(counts)
}

/// Samples the ±1 product observable `σ_z^{⊗N}`; `n_up` counts even parity.
pub fn shot_product<R: Rng + ?Sized>(
    outcome: &RideOutcome,
    shots: u64,
    rng: &mut R,
) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let n = outcome.ancillas();
    let m = outcome.final_state.num_qubits() - n;
    let sampler = outcome.final_state.sampler();
    let mut counts = ShotCounts::default();
    for _ in 0..shots {
        let ancilla_bits = sampler.sample(rng).index() >> m;
        if ancilla_bits.count_ones().is_multiple_of(2) {
            counts.n_up += 1;
        } else {
            counts.n_down += 1;
        }
    }
    Ok(counts)
}
