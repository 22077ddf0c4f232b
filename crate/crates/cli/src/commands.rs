use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use rodeo_core::harness::{energy_grid, fit_peaks, run_scan_with_threads};
use rodeo_core::oracle::{
    beta, bell_curve, dos, entropy, mean_score, one_spin_curve, overlaps_from_state,
    two_spin_curve, BellKind,
};
use rodeo_core::{
    detect_peaks, read_dataset, write_dataset, GaussianTimeParams, HermitianOperator,
    InitialStates, Mode, ModelSpec, Peak, PeakOptions, PsiSpec, RideRecord, RodeoConfig,
    ScanResult, SpectralDecomposition,
};

use crate::args::{
    CompareArgs, CurveKind, DosArgs, GridArgs, ModeKind, ModelArgs, ModelKind, OracleArgs,
    PeaksArgs, ScanArgs, TimeArgs,
};
use crate::table;

/// How a command failed; each maps to one exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
    Mismatch,
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Mismatch => 3,
        }
    }
}

impl From<rodeo_core::Error> for Failure {
    fn from(e: rodeo_core::Error) -> Self {
        use rodeo_core::Error::*;
        match e {
            Io { .. } | MalformedRecord { .. } | NoConvergence { .. } => Failure::Runtime(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

type CmdResult<T = ()> = std::result::Result<T, Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

/// `(τ, d, rounds)` used when the flags are omitted.
fn defaults(qubits: usize) -> (f64, f64, usize) {
    if qubits == 1 {
        (10.0, 7.0, 50)
    } else {
        (0.0, 10.0, 60)
    }
}

struct Model {
    spec: ModelSpec,
    op: HermitianOperator,
}

fn load_model(args: &ModelArgs) -> CmdResult<Model> {
    match args.model {
        ModelKind::Zeeman => {
            let spec = ModelSpec::Zeeman { spins: args.spins, field: args.field };
            let op = spec.load()?;
            Ok(Model { spec, op })
        }
        ModelKind::Custom => {
            let path = args.matrix.as_ref().ok_or_else(|| usage("--model custom needs --matrix"))?;
            let spec = ModelSpec::Custom { path: path.display().to_string() };
            // A bad matrix file is a runtime failure, not a flag error.
            let op = spec.load().map_err(runtime)?;
            Ok(Model { spec, op })
        }
    }
}

fn parse_state(s: &str) -> CmdResult<PsiSpec> {
    if let Some(path) = s.trim().strip_prefix("amps=") {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading amplitudes {path}"))
            .map_err(runtime)?;
        let amps: Vec<[f64; 2]> = serde_json::from_str(&text)
            .with_context(|| format!("amplitudes {path}: expected [[re, im], ...]"))
            .map_err(runtime)?;
        return Ok(PsiSpec::Amplitudes(amps));
    }
    Ok(s.parse()?)
}

fn initial_states(args: &ModelArgs, qubits: usize) -> CmdResult<InitialStates> {
    if let Some(count) = args.random_states {
        return Ok(InitialStates::Random { count });
    }
    if args.states.is_empty() {
        return Ok(InitialStates::List(vec![PsiSpec::Angles(vec![[0.0, 0.0]; qubits])]));
    }
    Ok(InitialStates::List(args.states.iter().map(|s| parse_state(s)).collect::<CmdResult<_>>()?))
}

fn time_params(args: &TimeArgs, qubits: usize) -> CmdResult<GaussianTimeParams> {
    let (tau, d, _) = defaults(qubits);
    Ok(GaussianTimeParams::new(args.tau.unwrap_or(tau), args.d.unwrap_or(d))?)
}

fn grid(args: &GridArgs) -> CmdResult<Vec<f64>> {
    Ok(energy_grid(args.e_min, args.e_max, args.de)?)
}

fn scan_config(args: &ScanArgs) -> CmdResult<(RodeoConfig, Model)> {
    let model = load_model(&args.model)?;
    let qubits = model.op.num_qubits();
    let mode = match (args.mode, args.shots) {
        (ModeKind::Exact, None) => Mode::Exact,
        (ModeKind::Shots, Some(s)) => Mode::Shots(s),
        (ModeKind::Shots, None) => return Err(usage("--mode shots needs --shots COUNT")),
        (ModeKind::Exact, Some(_)) => return Err(usage("--shots needs --mode shots")),
    };
    let config = RodeoConfig {
        model: model.spec.clone(),
        initial_states: initial_states(&args.model, qubits)?,
        ancillas: args.ancillas,
        e_min: args.grid.e_min,
        e_max: args.grid.e_max,
        de: args.grid.de,
        time: time_params(&args.time, qubits)?,
        n_rounds: args.rounds.unwrap_or(defaults(qubits).2),
        mode,
        master_seed: args.seed,
    };
    config.validate()?;
    Ok((config, model))
}

/// Writes `bytes` to `path`, or to standard output when absent.
fn emit(path: Option<&Path>, bytes: &[u8]) -> CmdResult {
    match path {
        Some(p) => std::fs::write(p, bytes)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(runtime),
        None => std::io::stdout().write_all(bytes).map_err(runtime),
    }
}

fn write_dataset_file(path: &Path, records: &[RideRecord]) -> CmdResult {
    let file = File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(runtime)?;
    write_dataset(records, BufWriter::new(file))?;
    Ok(())
}

fn peak_report(results: &[ScanResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(s, "psi {}: {} peak(s)", r.psi_index, r.peaks.len());
        for p in &r.peaks {
            let _ = writeln!(
                s,
                "  energy={:.6} centroid={:.6} height={:.6} stderr={:.6} width={:.6}",
                p.energy, p.centroid, p.height, p.stderr, p.width
            );
        }
        let total: f64 = r.peaks.iter().map(|p| p.height).sum();
        let _ = writeln!(s, "  height sum={total:.6}");
    }
    s
}

/// Scan table goes to `--out` or stdout; the peak report goes wherever the
/// table does not.
fn write_scan_outputs(args: &ScanArgs, results: &[ScanResult], records: &[RideRecord]) -> CmdResult {
    let mut buf = Vec::new();
    table::write_scan(results, &mut buf).map_err(runtime)?;
    emit(args.out.as_deref(), &buf)?;
    if let Some(path) = &args.dataset {
        write_dataset_file(path, records)?;
    }
    let report = peak_report(results);
    if args.out.is_some() {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    Ok(())
}

pub fn scan(args: &ScanArgs) -> CmdResult {
    let (config, _) = scan_config(args)?;
    let out = run_scan_with_threads(&config, args.threads)?;
    write_scan_outputs(args, &out.results, &out.records)
}

fn require_zeeman(model: &Model, spins: usize, curve: &str) -> CmdResult<f64> {
    match model.spec {
        ModelSpec::Zeeman { spins: s, field } if s == spins => Ok(field),
        _ => Err(usage(format!("--curve {curve} needs --model zeeman --spins {spins}"))),
    }
}

pub fn oracle(args: &OracleArgs) -> CmdResult {
    if args.model.random_states.is_some() {
        return Err(usage("--random-states needs a seed; use `rodeo scan`"));
    }
    let model = load_model(&args.model)?;
    let qubits = model.op.num_qubits();
    let InitialStates::List(specs) = initial_states(&args.model, qubits)? else {
        unreachable!("random states rejected above")
    };
    let p = time_params(&args.time, qubits)?;
    let energies = grid(&args.grid)?;

    let curves = specs
        .iter()
        .map(|spec| -> CmdResult<Vec<f64>> {
            let score: Box<dyn Fn(f64) -> f64> = match (args.curve, spec) {
                (CurveKind::Mean, _) => {
                    let state = spec.to_state()?;
                    let dec = SpectralDecomposition::of(&model.op)?;
                    let w = overlaps_from_state(&state, &dec)?;
                    Box::new(move |e| mean_score(&w, e, p))
                }
                (CurveKind::OneSpin, PsiSpec::Angles(a)) if a.len() == 1 => {
                    let field = require_zeeman(&model, 1, "one-spin")?;
                    let theta = a[0][0];
                    Box::new(move |e| one_spin_curve(theta, field, e, p))
                }
                (CurveKind::TwoSpin, PsiSpec::Angles(a)) if a.len() == 2 => {
                    let field = require_zeeman(&model, 2, "two-spin")?;
                    let (t1, t2) = (a[0][0], a[1][0]);
                    Box::new(move |e| two_spin_curve(t1, t2, field, e, p))
                }
                (CurveKind::Bell, PsiSpec::Bell(label)) => {
                    let field = require_zeeman(&model, 2, "bell")?;
                    let kind = BellKind::Bell(*label);
                    Box::new(move |e| bell_curve(kind, field, e, p))
                }
                (CurveKind::Bell, PsiSpec::Mix { family, alpha }) => {
                    let field = require_zeeman(&model, 2, "bell")?;
                    let kind = BellKind::Mix { family: *family, alpha: *alpha };
                    Box::new(move |e| bell_curve(kind, field, e, p))
                }
                (curve, _) => {
                    return Err(usage(format!(
                        "--curve {} does not accept this --state",
                        curve_name(curve)
                    )))
                }
            };
            Ok(energies.iter().map(|&e| -score(e)).collect())
        })
        .collect::<CmdResult<Vec<_>>>()?;

    let mut buf = Vec::new();
    table::write_curves(&energies, &curves, &mut buf).map_err(runtime)?;
    emit(args.out.as_deref(), &buf)
}

fn curve_name(c: CurveKind) -> &'static str {
    match c {
        CurveKind::Mean => "mean",
        CurveKind::OneSpin => "one-spin",
        CurveKind::TwoSpin => "two-spin",
        CurveKind::Bell => "bell",
    }
}

/// Fraction of points that must agree for `compare` to succeed.
const COMPARE_PASS_FRACTION: f64 = 0.99;
const COMPARE_SIGMAS: f64 = 5.0;
/// Absolute slack for points whose stderr is exactly zero.
const COMPARE_SLACK: f64 = 1e-9;

pub fn compare(args: &CompareArgs) -> CmdResult {
    let (config, model) = scan_config(&args.scan)?;
    let p = GaussianTimeParams::new(
        args.oracle_tau.unwrap_or(config.time.tau),
        args.oracle_d.unwrap_or(config.time.d),
    )?;
    let out = run_scan_with_threads(&config, args.scan.threads)?;
    let mut buf = Vec::new();
    table::write_scan(&out.results, &mut buf).map_err(runtime)?;
    if let Some(path) = &args.scan.out {
        emit(Some(path), &buf)?;
    }
    if let Some(path) = &args.scan.dataset {
        write_dataset_file(path, &out.records)?;
    }

    let dec = SpectralDecomposition::of(&model.op)?;
    let specs = config.resolve_states(model.op.num_qubits())?;
    let mut report = String::new();
    let mut all_pass = true;
    for r in &out.results {
        let w = overlaps_from_state(&specs[r.psi_index].to_state()?, &dec)?;
        let mut offenders: Vec<(f64, usize, f64)> = Vec::new();
        let mut ok = 0;
        for (i, &e) in r.energies.iter().enumerate() {
            let expected = -mean_score(&w, e, p);
            let diff = r.mean_neg_h[i] - expected;
            if diff.abs() <= COMPARE_SIGMAS * r.stderr[i] + COMPARE_SLACK {
                ok += 1;
            } else {
                let z = if r.stderr[i] > 0.0 { diff.abs() / r.stderr[i] } else { f64::INFINITY };
                offenders.push((z, i, expected));
            }
        }
        let n = r.energies.len();
        let pass = ok as f64 >= COMPARE_PASS_FRACTION * n as f64;
        all_pass &= pass;
        let _ = writeln!(
            report,
            "psi {}: {ok}/{n} points within {COMPARE_SIGMAS} stderr ({:.2}%) {}",
            r.psi_index,
            100.0 * ok as f64 / n as f64,
            if pass { "PASS" } else { "FAIL" }
        );
        let levels = w.level_weights(1e-9);
        for pk in &r.peaks {
            let reach = config.de + 1.0 / p.d;
            let expected: f64 =
                levels.iter().filter(|(e, _)| (e - pk.energy).abs() <= reach).map(|(_, w)| w).sum();
            let _ = writeln!(
                report,
                "  peak energy={:.6} height={:.6} stderr={:.6} level weight={:.6}",
                pk.energy, pk.height, pk.stderr, expected
            );
        }
        if !pass {
            offenders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            for &(z, i, expected) in offenders.iter().take(args.worst) {
                let _ = writeln!(
                    report,
                    "  worst energy={:.6} sim={:.6} oracle={:.6} stderr={:.6} z={:.2}",
                    r.energies[i], r.mean_neg_h[i], expected, r.stderr[i], z
                );
            }
        }
    }
    print!("{report}");
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

pub fn dos_table(args: &DosArgs) -> CmdResult {
    let p = GaussianTimeParams::new(args.tau, args.d)?;
    if !args.field.is_finite() {
        return Err(usage("--field must be finite"));
    }
    let energies = grid(&args.grid)?;
    let omega: Vec<f64> = energies.iter().map(|&e| dos(e, args.field, p)).collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["energy", "omega", "entropy", "beta"]).map_err(runtime)?;
    for (&e, &o) in energies.iter().zip(&omega) {
        w.write_record([
            e.to_string(),
            o.to_string(),
            entropy(e, args.field, args.d).to_string(),
            beta(e, args.field, args.d).to_string(),
        ])
        .map_err(runtime)?;
    }
    let mut buf = w.into_inner().map_err(|e| runtime(anyhow!("{e}")))?;
    let integral: f64 = energies
        .windows(2)
        .zip(omega.windows(2))
        .map(|(e, o)| 0.5 * (e[1] - e[0]) * (o[0] + o[1]))
        .sum();
    writeln!(buf, "# integral_omega={integral}").map_err(runtime)?;
    emit(args.out.as_deref(), &buf)
}

pub fn peaks(args: &PeaksArgs) -> CmdResult {
    if !(args.threshold.is_finite() && args.significance >= 0.0) {
        return Err(usage("--threshold must be finite and --significance non-negative"));
    }
    let file = File::open(&args.input)
        .with_context(|| format!("opening {}", args.input.display()))
        .map_err(runtime)?;
    let mut results = table::read_scan(BufReader::new(file))
        .with_context(|| format!("reading {}", args.input.display()))
        .map_err(runtime)?;

    let records = match &args.dataset {
        Some(path) => {
            let file = File::open(path)
                .with_context(|| format!("opening {}", path.display()))
                .map_err(runtime)?;
            read_dataset(BufReader::new(file))?
        }
        None => Vec::new(),
    };
    let kernel = match (args.d, records.first()) {
        (Some(d), _) => Some(GaussianTimeParams::new(args.tau, d)?),
        (None, Some(r)) => Some(GaussianTimeParams::new(r.tau, r.d)?),
        (None, None) => None,
    };
    let merge_radius = match (args.merge_radius, kernel) {
        (Some(m), _) => m,
        (None, Some(p)) => 3.0 / p.d,
        (None, None) => 10.0 * median_spacing(&results),
    };
    let opts = PeakOptions {
        threshold: args.threshold,
        merge_radius,
        significance: args.significance,
        kernel,
    };
    for r in &mut results {
        let found: Vec<Peak> = detect_peaks(r, &opts);
        r.peaks = if records.is_empty() {
            found
        } else {
            let rides: Vec<RideRecord> =
                records.iter().filter(|x| x.psi_index == r.psi_index).cloned().collect();
            fit_peaks(&rides, &found, &opts)
        };
    }
    print!("{}", peak_report(&results));
    Ok(())
}

fn median_spacing(results: &[ScanResult]) -> f64 {
    let mut gaps: Vec<f64> = results
        .iter()
        .flat_map(|r| r.energies.windows(2).map(|w| w[1] - w[0]))
        .collect();
    if gaps.is_empty() {
        return 0.0;
    }
    gaps.sort_by(f64::total_cmp);
    gaps[gaps.len() / 2]
}
