use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Mode, RodeoConfig};
use super::dataset::{RecordMode, RideRecord, Zeta};
use super::peaks::{detect_peaks, fit_peaks, Peak, PeakOptions};
use super::rng::{ride_stream, sample_times};
use crate::engine::{ride, shot_estimate, RidePlan};
use crate::error::{Error, Result};
use crate::hamiltonian::SpectralDecomposition;
use crate::qcore::StateVector;
use crate::states::PsiSpec;

/// Aggregated `−h̄(E)` curve for one initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub psi_index: usize,
    pub energies: Vec<f64>,
    pub mean_neg_h: Vec<f64>,
    /// `sqrt[(⟨x²⟩ − ⟨x⟩²)/n]`; reported as 0 where only one ride exists.
    pub stderr: Vec<f64>,
    pub n_rounds: Vec<usize>,
    pub peaks: Vec<Peak>,
}

impl ScanResult {
    /// Whether point `i` has enough rides for a meaningful stderr.
    pub fn stderr_defined(&self, i: usize) -> bool {
        self.n_rounds[i] >= 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOutput {
    /// One curve per ψ index.
    pub results: Vec<ScanResult>,
    /// Every ride in `ride_index` order: ψ-major, then grid point, then round.
    pub records: Vec<RideRecord>,
}

/// Runs every ride of `config` on the current rayon pool. Output is identical
/// for any pool size. Peaks are located on the aggregated curve and their
/// heights fitted against the individual rides.
pub fn run_scan(config: &RodeoConfig) -> Result<ScanOutput> {
    config.validate()?;
    let hamiltonian = config.model.load()?;
    let decomp = SpectralDecomposition::of(&hamiltonian)?;
    let system_qubits = hamiltonian.num_qubits();
    let specs = config.resolve_states(system_qubits)?;
    let states = specs
        .iter()
        .map(|s| {
            let state = s.to_state()?;
            if state.num_qubits() != system_qubits {
                return Err(Error::InvalidState(format!(
                    "state has {} qubits but the model has {system_qubits}",
                    state.num_qubits()
                )));
            }
            Ok(state)
        })
        .collect::<Result<Vec<StateVector>>>()?;
    let energies = config.energies();
    let n_grid = energies.len();

    let work = RideWork { config, decomp: &decomp, specs: &specs, states: &states, energies: &energies };
    let blocks = (0..specs.len() * n_grid)
        .into_par_iter()
        .map(|item| work.rides_at(item / n_grid, item % n_grid))
        .collect::<Result<Vec<Vec<RideRecord>>>>()?;
    let records: Vec<RideRecord> = blocks.into_iter().flatten().collect();

    let opts = PeakOptions::for_filter(config.time);
    let mut results = aggregate(&records)?;
    let per_psi = records.len() / results.len();
    for (r, rides) in results.iter_mut().zip(records.chunks(per_psi)) {
        r.peaks = fit_peaks(rides, &detect_peaks(r, &opts), &opts);
    }
    Ok(ScanOutput { results, records })
}

/// [`run_scan`] on a dedicated pool of `threads` workers; 0 picks the rayon
/// default.
pub fn run_scan_with_threads(config: &RodeoConfig, threads: usize) -> Result<ScanOutput> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?
        .install(|| run_scan(config))
}

struct RideWork<'a> {
    config: &'a RodeoConfig,
    decomp: &'a SpectralDecomposition,
    specs: &'a [PsiSpec],
    states: &'a [StateVector],
    energies: &'a [f64],
}

impl RideWork<'_> {
    fn rides_at(&self, psi: usize, grid: usize) -> Result<Vec<RideRecord>> {
        let c = self.config;
        let energy = self.energies[grid];
        (0..c.n_rounds)
            .map(|round| {
                let mut rng = ride_stream(c.master_seed, grid, round, psi);
                let times = sample_times(c.time, c.ancillas, &mut rng);
                let plan = RidePlan::new(energy, &times, self.decomp, &self.states[psi])?;
                let outcome = ride(&plan)?;
                let (mode, zeta, shots) = match c.mode {
                    Mode::Exact => (RecordMode::Exact, Zeta::Exact(outcome.per_ancilla_z), None),
                    Mode::Shots(s) => {
                        let counts = shot_estimate(&outcome, s, &mut rng)?;
                        (RecordMode::Shots, Zeta::from_counts(&counts), Some(s))
                    }
                };
                let ride_index = ((psi * self.energies.len() + grid) * c.n_rounds + round) as u64;
                Ok(RideRecord {
                    ride_index,
                    psi_index: psi,
                    grid_index: grid,
                    round,
                    times,
                    energy,
                    d: c.time.d,
                    tau: c.time.tau,
                    model: c.model.clone(),
                    psi: self.specs[psi].clone(),
                    mode,
                    zeta,
                    shots,
                })
            })
            .collect()
    }
}

/// Groups records by `(psi_index, grid_index)` and averages the per-ride
/// scores. Results come back sorted by ψ index, points by grid index.
/// Peaks are left empty.
pub fn aggregate(records: &[RideRecord]) -> Result<Vec<ScanResult>> {
    use std::collections::BTreeMap;

    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to aggregate".into()));
    }
    let mut groups: BTreeMap<usize, BTreeMap<usize, (f64, Vec<f64>)>> = BTreeMap::new();
    for r in records {
        let slot = groups
            .entry(r.psi_index)
            .or_default()
            .entry(r.grid_index)
            .or_insert_with(|| (r.energy, Vec::new()));
        slot.1.push(-r.score());
    }
    Ok(groups
        .into_iter()
        .map(|(psi_index, points)| {
            let mut out = ScanResult {
                psi_index,
                energies: Vec::with_capacity(points.len()),
                mean_neg_h: Vec::with_capacity(points.len()),
                stderr: Vec::with_capacity(points.len()),
                n_rounds: Vec::with_capacity(points.len()),
                peaks: Vec::new(),
            };
            for (_, (energy, xs)) in points {
                let (mean, se) = mean_and_stderr(&xs);
                out.energies.push(energy);
                out.mean_neg_h.push(mean);
                out.stderr.push(se);
                out.n_rounds.push(xs.len());
            }
            out
        })
        .collect())
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let x0 = xs[0];
    let shift = xs.iter().map(|x| x - x0).sum::<f64>() / n;
    let var = (xs.iter().map(|x| (x - x0).powi(2)).sum::<f64>() / n - shift * shift).max(0.0);
    (mean, (var / n).sqrt())
}
