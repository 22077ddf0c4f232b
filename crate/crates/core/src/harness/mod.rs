//! Energy scans: configuration, seeded ride execution, aggregation into
//! `−h̄(E)` curves, peak extraction and the line-delimited ride dataset.

pub mod config;
pub mod dataset;
pub mod peaks;
pub mod rng;
pub mod scan;

pub use config::{energy_grid, read_matrix_file, InitialStates, Mode, ModelSpec, RodeoConfig};
pub use dataset::{read_dataset, write_dataset, RecordMode, RideRecord, Zeta};
pub use peaks::{detect_peaks, filtered_curve, fit_peaks, weighted_amplitude, Peak, PeakOptions};
pub use rng::{ride_stream, sample_times};
pub use scan::{aggregate, run_scan, run_scan_with_threads, ScanOutput, ScanResult};
