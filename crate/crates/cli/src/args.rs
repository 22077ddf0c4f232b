use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "rodeo",
    version,
    about = "Rodeo eigenvalue-filter simulator for Zeeman and custom Hamiltonians",
    after_help = "Exit codes: 0 success, 1 usage error, 2 runtime error, 3 comparison failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an energy scan and write the −h̄(E) table.
    Scan(ScanArgs),
    /// Evaluate the closed-form −h̄(E) on the energy grid.
    Oracle(OracleArgs),
    /// Run a scan and check it point by point against the oracle.
    Compare(CompareArgs),
    /// Density of states, entropy and β of the two-spin Zeeman model.
    Dos(DosArgs),
    /// Detect peaks in an existing scan table.
    Peaks(PeaksArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// H = −B Σ σ_z over --spins spins.
    Zeeman,
    /// Dense Hermitian matrix read from --matrix.
    Custom,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Target Hamiltonian.
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Number of spins in the Zeeman model.
    #[arg(long, default_value_t = 1)]
    pub spins: usize,
    /// Zeeman field B (μ_B = 1).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub field: f64,
    /// JSON matrix for --model custom: rows of [re, im] pairs.
    #[arg(long, required_if_eq("model", "custom"))]
    pub matrix: Option<PathBuf>,
    /// Initial state: theta=X[,phi=Y][;theta=...] per qubit, bell=phi+|phi-|psi+|psi-,
    /// mix=phi:ALPHA, mix=psi:ALPHA or amps=FILE (JSON [re, im] pairs). Angles accept
    /// pi, pi/K and K*pi/L. Repeat the flag to sweep several states. Default |0...0⟩.
    #[arg(long = "state", value_name = "STATE")]
    pub states: Vec<String>,
    /// Sweep this many seeded random product states instead of --state.
    #[arg(long, value_name = "COUNT", conflicts_with = "states")]
    pub random_states: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Lowest trial energy.
    #[arg(long, allow_negative_numbers = true)]
    pub e_min: f64,
    /// Highest trial energy (inclusive).
    #[arg(long, allow_negative_numbers = true)]
    pub e_max: f64,
    /// Energy step ΔE.
    #[arg(long)]
    pub de: f64,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    /// Mean τ of the Gaussian time distribution. Default 10 for one qubit, 0 otherwise.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Width d of the Gaussian time distribution. Default 7 for one qubit, 10 otherwise.
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeKind {
    /// Exact per-ancilla ⟨σ_z⟩.
    Exact,
    /// Finite measurement shots per ride (needs --shots).
    Shots,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    /// Rides per grid point. Default 50 for one qubit, 60 otherwise.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Master seed for every random stream.
    #[arg(long)]
    pub seed: u64,
    /// Ancilla qubits per ride.
    #[arg(long, default_value_t = 1)]
    pub ancillas: usize,
    /// Readout mode.
    #[arg(long, value_enum, default_value_t = ModeKind::Exact)]
    pub mode: ModeKind,
    /// Shots per ride in shot mode.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Scan table path (CSV). Standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ride dataset path (one JSON record per line).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    /// Level weights from the state and the model's eigenvectors.
    Mean,
    /// One-spin Zeeman product state (theta=...).
    OneSpin,
    /// Two-spin Zeeman product state (theta=...;theta=...).
    TwoSpin,
    /// Two-spin Zeeman Bell or mixed state (bell=..., mix=...).
    Bell,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    /// Closed form to evaluate.
    #[arg(long, value_enum, default_value_t = CurveKind::Mean)]
    pub curve: CurveKind,
    /// Table path (CSV). Standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    /// τ used for the oracle; defaults to the scan's τ.
    #[arg(long, allow_negative_numbers = true)]
    pub oracle_tau: Option<f64>,
    /// d used for the oracle; defaults to the scan's d.
    #[arg(long)]
    pub oracle_d: Option<f64>,
    /// Worst points listed on failure.
    #[arg(long, default_value_t = 10)]
    pub worst: usize,
}

#[derive(Debug, Args)]
pub struct DosArgs {
    /// Zeeman field B.
    #[arg(long, allow_negative_numbers = true)]
    pub field: f64,
    /// Gaussian width d.
    #[arg(long, allow_negative_numbers = true)]
    pub d: f64,
    /// Gaussian mean τ for the Ω column; entropy and β are the τ = 0 forms.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tau: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Table path (CSV). Standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PeaksArgs {
    /// Scan table written by `rodeo scan`.
    #[arg(long = "in", value_name = "TABLE")]
    pub input: PathBuf,
    /// Minimum peak height.
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
    /// Maxima closer than this merge into one peak. Default 3/d, or ten grid
    /// steps without a filter width.
    #[arg(long)]
    pub merge_radius: Option<f64>,
    /// Minimum height in units of its standard error.
    #[arg(long, default_value_t = 4.0)]
    pub significance: f64,
    /// Filter width d; enables matched filtering of the curve.
    #[arg(long)]
    pub d: Option<f64>,
    /// Filter mean τ used with --d.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tau: f64,
    /// Ride dataset of the same scan; refines heights ride by ride and
    /// supplies d and τ when --d is absent.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}
