use std::path::Path;
use std::process::{Command, Output};

fn rodeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rodeo")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Rows of a CSV table as floats, skipping the header and `#` lines.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const ONE_SPIN_GRID: [&str; 6] = ["--e-min", "-2", "--e-max", "2", "--de", "0.02"];

#[test]
fn help_exits_zero_for_every_subcommand() {
    for sub in ["scan", "oracle", "compare", "dos", "peaks"] {
        let out = rodeo(&[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub}");
        assert!(stdout(&out).contains("--"), "{sub}");
    }
    let scan_help = stdout(&rodeo(&["scan", "--help"]));
    for flag in ["--model", "--e-min", "--de", "--tau", "--d ", "--rounds", "--seed", "--ancillas", "--state"] {
        assert!(scan_help.contains(flag), "scan --help lacks {flag}");
    }
    assert_eq!(code(&rodeo(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let out = rodeo(&["scan", "--model", "zeeman", "--e-min", "-1", "--e-max", "1", "--seed", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--de"));

    let out = rodeo(&["scan", "--model", "zeeman", "--e-min", "-1", "--e-max", "1", "--de", "0.1", "--seed", "1", "--mode", "shots"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--shots"));

    assert_eq!(code(&rodeo(&["scan", "--bogus"])), 1);
    assert_eq!(code(&rodeo(&["frobnicate"])), 1);
    assert_eq!(code(&rodeo(&["scan", "--model", "zeeman", "--e-min", "1", "--e-max", "-1", "--de", "0.1", "--seed", "1"])), 1);
    assert_eq!(code(&rodeo(&["scan", "--model", "zeeman", "--state", "theta=abc", "--e-min", "-1", "--e-max", "1", "--de", "0.1", "--seed", "1"])), 1);
}

#[test]
fn eigenstate_scan_has_one_full_peak() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("scan.csv");
    let mut args = vec!["scan", "--model", "zeeman", "--spins", "1", "--field", "1.0", "--state", "theta=0", "--seed", "3"];
    args.extend(ONE_SPIN_GRID);
    args.extend(["--out", path_str(&table)]);
    let out = rodeo(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("energy,neg_h_mean,stderr,n_rounds\n"));
    let rows = rows(&text);
    assert_eq!(rows.len(), 201);
    assert!(rows.iter().all(|r| r[3] == 50.0));
    let best = rows.iter().max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert!((best[0].abs() - 1.0).abs() < 1e-9 && best[1] >= 0.98, "{best:?}");
    assert!(stdout(&out).contains("1 peak(s)"));

    let peaks = rodeo(&["peaks", "--in", path_str(&table), "--d", "7", "--tau", "10"]);
    assert_eq!(code(&peaks), 0);
    assert!(stdout(&peaks).contains("psi 0: 1 peak(s)"), "{}", stdout(&peaks));
}

#[test]
fn shot_counts_sum_to_shot_number() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("rides.jsonl");
    let out = rodeo(&[
        "scan", "--model", "zeeman", "--state", "theta=pi/2", "--e-min", "-1", "--e-max", "1", "--de", "0.5",
        "--rounds", "3", "--seed", "9", "--ancillas", "2", "--mode", "shots", "--shots", "1024",
        "--dataset", path_str(&data),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 5 * 3);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["mode"], "shots");
        assert_eq!(v["shots"], 1024);
        let zeta = v["zeta"].as_array().unwrap();
        assert_eq!(zeta.len(), 2);
        for pair in zeta {
            let pair = pair.as_array().unwrap();
            assert_eq!(pair[0].as_u64().unwrap() + pair[1].as_u64().unwrap(), 1024);
        }
    }
}

#[test]
fn oracle_curves() {
    let out = rodeo(&[
        "oracle", "--model", "zeeman", "--spins", "1", "--state", "theta=pi/2", "--curve", "one-spin",
        "--tau", "0", "--d", "7", "--e-min", "-2", "--e-max", "2", "--de", "0.5",
    ]);
    assert_eq!(code(&out), 0);
    let r = rows(&stdout(&out));
    let at = |e: f64| r.iter().find(|row| (row[0] - e).abs() < 1e-12).unwrap()[1];
    assert!((at(-1.0) - at(1.0)).abs() <= 1e-12);
    for (a, b) in r.iter().zip(r.iter().rev()) {
        assert!((a[1] - b[1]).abs() <= 1e-12);
    }

    let out = rodeo(&[
        "oracle", "--model", "zeeman", "--spins", "2", "--field", "0.7", "--state", "bell=phi+", "--curve", "bell",
        "--e-min", "-2.1", "--e-max", "2.1", "--de", "0.7",
    ]);
    assert_eq!(code(&out), 0);
    let r = rows(&stdout(&out));
    let max = r.iter().map(|row| row[1]).fold(f64::NEG_INFINITY, f64::max);
    assert!((max - 0.5).abs() < 1e-12);
    for e in [-1.4, 1.4] {
        let row = r.iter().find(|row| (row[0] - e).abs() < 1e-9).unwrap();
        assert!((row[1] - 0.5).abs() < 1e-12);
    }

    let out = rodeo(&[
        "oracle", "--model", "zeeman", "--spins", "2", "--field", "0.7", "--state", "mix=phi:0.6283", "--curve", "bell",
        "--e-min", "-1.4", "--e-max", "1.4", "--de", "1.4",
    ]);
    let r = rows(&stdout(&out));
    let alpha: f64 = 0.6283;
    assert!((r[0][1] - alpha.cos().powi(2)).abs() < 1e-12);
    assert!((r[2][1] - alpha.sin().powi(2)).abs() < 1e-12);
    assert!(r[1][1].abs() < 1e-12);

    let out = rodeo(&[
        "oracle", "--model", "zeeman", "--spins", "1", "--state", "bell=phi+", "--curve", "bell", "--e-min", "-1",
        "--e-max", "1", "--de", "0.1",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn oracle_mean_curve_matches_closed_forms() {
    let grid = ["--e-min", "-3", "--e-max", "3", "--de", "0.25"];
    let run = |curve: &str| {
        let mut args = vec!["oracle", "--model", "zeeman", "--spins", "2", "--field", "0.7", "--state", "theta=1.1;theta=2.3", "--curve", curve];
        args.extend(grid);
        rows(&stdout(&rodeo(&args)))
    };
    for (a, b) in run("mean").iter().zip(&run("two-spin")) {
        assert!((a[1] - b[1]).abs() < 1e-12);
    }
}

#[test]
fn compare_passes_and_negative_control_fails() {
    let mut base = vec!["compare", "--model", "zeeman", "--state", "theta=2*pi/5", "--seed", "4"];
    base.extend(ONE_SPIN_GRID);
    let out = rodeo(&base);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));

    let mut bad = base.clone();
    bad.extend(["--rounds", "500", "--oracle-tau", "0", "--worst", "2"]);
    let out = rodeo(&bad);
    assert_eq!(code(&out), 3);
    let report = stdout(&out);
    assert!(report.contains("FAIL"));
    assert_eq!(report.matches("worst energy=").count(), 2);
}

#[test]
fn compare_reports_peak_heights_near_level_weights() {
    let mut args = vec!["compare", "--model", "zeeman", "--state", "theta=2*pi/5", "--seed", "5", "--rounds", "10000"];
    args.extend(["--e-min", "-1.5", "--e-max", "1.5", "--de", "0.05"]);
    let out = rodeo(&args);
    assert_eq!(code(&out), 0);
    let report = stdout(&out);
    let heights: Vec<f64> = report
        .lines()
        .filter_map(|l| l.split("height=").nth(1))
        .map(|s| s.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(heights.len(), 2, "{report}");
    let (lo, hi) = (heights[0].min(heights[1]), heights[0].max(heights[1]));
    assert!((hi - 0.6545).abs() <= 0.02 && (lo - 0.3455).abs() <= 0.02, "{report}");
}

#[test]
fn dos_table() {
    let out = rodeo(&["dos", "--field", "0.7", "--d", "0", "--e-min", "-3", "--e-max", "3", "--de", "0.01"]);
    assert_eq!(code(&out), 1);

    let out = rodeo(&["dos", "--field", "0.7", "--d", "10", "--e-min", "-3", "--e-max", "3", "--de", "0.001"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("energy,omega,entropy,beta\n"));
    let r = rows(&text);
    let n = r.len();
    for i in 0..n {
        let (a, b) = (&r[i], &r[n - 1 - i]);
        assert!((a[0] + b[0]).abs() < 1e-9);
        assert!((a[1] - b[1]).abs() <= 1e-12 * a[1].abs().max(1.0));
        assert!((a[2] - b[2]).abs() <= 1e-9);
        assert!((a[3] + b[3]).abs() <= 1e-6);
    }
    let integral: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# integral_omega="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((integral - 1.0).abs() < 1e-4, "{integral}");

    // Central differences of the entropy column across the sharpest transition.
    let out = rodeo(&["dos", "--field", "0.7", "--d", "10", "--e-min", "0.69", "--e-max", "0.71", "--de", "0.00001"]);
    let r = rows(&stdout(&out));
    for i in 1..r.len() - 1 {
        let fd = (r[i + 1][2] - r[i - 1][2]) / (r[i + 1][0] - r[i - 1][0]);
        assert!((fd - r[i][3]).abs() < 1e-4, "E={} fd={fd} beta={}", r[i][0], r[i][3]);
    }
}

#[test]
fn peaks_on_tables() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.csv");
    let mut text = String::from("energy,neg_h_mean,stderr,n_rounds\n");
    for i in 0..41 {
        text.push_str(&format!("{},0,0,50\n", -2.0 + 0.1 * i as f64));
    }
    std::fs::write(&flat, text).unwrap();
    let out = rodeo(&["peaks", "--in", path_str(&flat)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("0 peak(s)"));

    let table = dir.path().join("half.csv");
    let data = dir.path().join("half.jsonl");
    let mut args = vec!["scan", "--model", "zeeman", "--state", "theta=pi/2", "--seed", "6"];
    args.extend(ONE_SPIN_GRID);
    args.extend(["--out", path_str(&table), "--dataset", path_str(&data)]);
    assert_eq!(code(&rodeo(&args)), 0);
    for extra in [vec!["--d", "7", "--tau", "10"], vec!["--dataset", path_str(&data)]] {
        let mut a = vec!["peaks", "--in", path_str(&table)];
        a.extend(extra);
        let out = rodeo(&a);
        assert_eq!(code(&out), 0);
        let report = stdout(&out);
        assert!(report.contains("2 peak(s)"), "{report}");
        let sum: f64 = report
            .lines()
            .find_map(|l| l.trim().strip_prefix("height sum="))
            .unwrap()
            .parse()
            .unwrap();
        assert!((sum - 1.0).abs() <= 0.05, "{report}");
    }

    assert_eq!(code(&rodeo(&["peaks", "--in", "/nonexistent/table.csv"])), 2);
    let garbage = dir.path().join("garbage.csv");
    std::fs::write(&garbage, "energy,neg_h_mean\n1,abc\n").unwrap();
    assert_eq!(code(&rodeo(&["peaks", "--in", path_str(&garbage)])), 2);
}

#[test]
fn custom_matrix_and_amplitude_states() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("h.json");
    std::fs::write(&matrix, "[[[-1,0],[0,0]],[[0,0],[1,0]]]").unwrap();
    let amps = dir.path().join("psi.json");
    std::fs::write(&amps, "[[0.6,0],[0,0.8]]").unwrap();
    let grid = ["--e-min", "-2", "--e-max", "2", "--de", "0.1"];

    let amp_state = format!("amps={}", path_str(&amps));
    let mut custom = vec!["scan", "--model", "custom", "--matrix", path_str(&matrix), "--state", &amp_state, "--seed", "2"];
    custom.extend(grid);
    let a = rodeo(&custom);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let r = rows(&stdout(&a));
    assert_eq!(r.len(), 41);

    let out = rodeo(&["oracle", "--model", "custom", "--matrix", path_str(&matrix), "--state", &amp_state, "--curve", "mean", "--e-min", "-1", "--e-max", "1", "--de", "2", "--tau", "0", "--d", "50"]);
    let o = rows(&stdout(&out));
    assert!((o[0][1] - 0.36).abs() < 1e-12 && (o[1][1] - 0.64).abs() < 1e-12);

    let missing = rodeo(&["scan", "--model", "custom", "--matrix", "/nonexistent/h.json", "--seed", "1", "--e-min", "-1", "--e-max", "1", "--de", "0.5"]);
    assert_eq!(code(&missing), 2);
    let no_matrix = rodeo(&["scan", "--model", "custom", "--seed", "1", "--e-min", "-1", "--e-max", "1", "--de", "0.5"]);
    assert_eq!(code(&no_matrix), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "scan", "--model", "zeeman", "--spins", "2", "--field", "0.7", "--random-states", "2", "--e-min", "-2",
        "--e-max", "2", "--de", "0.1", "--rounds", "4", "--seed", "12",
    ];
    let a = rodeo(&args);
    let b = rodeo(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    assert!(stdout(&a).starts_with("energy,neg_h_mean,stderr,n_rounds,psi_index\n"));
}
