use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::rng::{check_stream_limits, psi_stream, random_angles, MAX_GRID_POINTS};
use crate::error::{Error, Result};
use crate::hamiltonian::{zeeman, HermitianOperator, ZeemanParams};
use crate::oracle::GaussianTimeParams;
use crate::qcore::C64;
use crate::states::PsiSpec;

/// Target Hamiltonian. Serialized as `{"name":"zeeman","spins":2,"field":0.7}`
/// or `{"name":"custom","path":"h.json"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum ModelSpec {
    Zeeman { spins: usize, field: f64 },
    Custom { path: String },
}

impl ModelSpec {
    pub fn load(&self) -> Result<HermitianOperator> {
        match self {
            ModelSpec::Zeeman { spins, field } => {
                zeeman(ZeemanParams { spins: *spins, field: *field })
            }
            ModelSpec::Custom { path } => read_matrix_file(Path::new(path)),
        }
    }
}

/// Reads a dense Hermitian matrix stored as JSON rows of `[re, im]` pairs:
/// `[[[1,0],[0,-1]],[[0,1],[2,0]]]`.
pub fn read_matrix_file(path: &Path) -> Result<HermitianOperator> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        context: format!("reading matrix {}", path.display()),
        source,
    })?;
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidParameter(format!("matrix {}: {e}", path.display()))
    })?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter(format!("matrix {} is not square", path.display())));
    }
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
    HermitianOperator::new(m, format!("custom({})", path.display()))
}

/// `e_min + i·ΔE` for `i = 0..=N_E` with `N_E = round((e_max − e_min)/ΔE) ≥ 1`.
pub fn energy_grid(e_min: f64, e_max: f64, de: f64) -> Result<Vec<f64>> {
    if !(e_min.is_finite() && e_max.is_finite() && e_min < e_max) {
        return Err(Error::InvalidParameter(format!(
            "need e_min < e_max (got {e_min} and {e_max})"
        )));
    }
    if !(de > 0.0 && de.is_finite()) {
        return Err(Error::InvalidParameter(format!("energy step must be positive, got {de}")));
    }
    let steps = ((e_max - e_min) / de).round();
    if steps < 1.0 {
        return Err(Error::InvalidParameter("energy grid has no intervals".into()));
    }
    if steps >= MAX_GRID_POINTS as f64 {
        return Err(Error::InvalidParameter(format!("energy grid too fine ({steps} steps)")));
    }
    Ok((0..=steps as usize).map(|i| e_min + i as f64 * de).collect())
}

/// Readout mode: exact per-ancilla expectations or finite shot counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Shots(u64),
}

/// Which initial states a scan sweeps.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialStates {
    List(Vec<PsiSpec>),
    /// `count` states with seeded uniform `(θ, φ)` per qubit.
    Random { count: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RodeoConfig {
    pub model: ModelSpec,
    pub initial_states: InitialStates,
    pub ancillas: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub de: f64,
    pub time: GaussianTimeParams,
    pub n_rounds: usize,
    pub mode: Mode,
    pub master_seed: u64,
}

impl RodeoConfig {
    pub fn validate(&self) -> Result<()> {
        energy_grid(self.e_min, self.e_max, self.de)?;
        GaussianTimeParams::new(self.time.tau, self.time.d)?;
        if self.n_rounds == 0 {
            return Err(Error::InvalidParameter("n_rounds must be at least 1".into()));
        }
        if self.ancillas == 0 {
            return Err(Error::InvalidParameter("need at least one ancilla".into()));
        }
        if self.n_psi() == 0 {
            return Err(Error::InvalidParameter("need at least one initial state".into()));
        }
        if let Mode::Shots(0) = self.mode {
            return Err(Error::InvalidParameter("shot mode needs at least one shot".into()));
        }
        check_stream_limits(self.grid_steps() + 1, self.n_rounds, self.n_psi())
    }

    /// `N_E = round((e_max − e_min)/ΔE)`.
    pub fn grid_steps(&self) -> usize {
        ((self.e_max - self.e_min) / self.de).round() as usize
    }

    /// `e_min + i·ΔE` for `i = 0..=N_E`.
    pub fn energies(&self) -> Vec<f64> {
        (0..=self.grid_steps()).map(|i| self.e_min + i as f64 * self.de).collect()
    }

    pub fn n_psi(&self) -> usize {
        match &self.initial_states {
            InitialStates::List(list) => list.len(),
            InitialStates::Random { count } => *count,
        }
    }

    /// Total rides a scan emits.
    pub fn ride_count(&self) -> usize {
        self.energies().len() * self.n_rounds * self.n_psi()
    }

    /// Concrete descriptors for every ψ index, drawing random angles where requested.
    pub fn resolve_states(&self, system_qubits: usize) -> Result<Vec<PsiSpec>> {
        match &self.initial_states {
            InitialStates::List(list) => Ok(list.clone()),
            InitialStates::Random { count } => Ok((0..*count)
                .map(|p| {
                    PsiSpec::Angles(random_angles(system_qubits, &mut psi_stream(self.master_seed, p)))
                })
                .collect()),
        }
    }
}
