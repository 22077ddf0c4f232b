//! Dense state-vector simulation, closed-form oracle and Monte Carlo energy
//! scans for the Rodeo eigenvalue filter on Zeeman and custom Hamiltonians.
//!
//! The pipeline is: build a [`HermitianOperator`], decompose it into a
//! [`SpectralDecomposition`], pick an initial state, then either evaluate the
//! analytic response with [`oracle`] or simulate rides with [`engine`] and
//! aggregate them with [`harness`].

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod oracle;
pub mod qcore;
pub mod states;

pub use engine::{ride, RideOutcome, RidePlan, ShotCounts};
pub use error::{Error, Result};
pub use hamiltonian::{zeeman, HermitianOperator, SpectralDecomposition, ZeemanParams};
pub use harness::{
    aggregate, detect_peaks, read_dataset, run_scan, write_dataset, InitialStates, Mode,
    ModelSpec, Peak, PeakOptions, RideRecord, RodeoConfig, ScanOutput, ScanResult, Zeta,
};
pub use oracle::{GaussianTimeParams, SpectralWeights};
pub use qcore::{Bitstring, Gate2, StateVector, C64, MAX_QUBITS};
pub use states::{BellFamily, BellLabel, PsiSpec};
