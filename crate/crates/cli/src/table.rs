//! CSV tables. Floats are written in shortest round-trip form so reruns are
//! byte-identical and values read back exactly.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use rodeo_core::ScanResult;

pub const SCAN_HEADER: [&str; 4] = ["energy", "neg_h_mean", "stderr", "n_rounds"];

/// `energy,neg_h_mean,stderr,n_rounds`, plus `psi_index` when several states
/// were swept.
pub fn write_scan<W: Write>(results: &[ScanResult], sink: W) -> Result<()> {
    let multi = results.len() > 1;
    let mut w = csv::Writer::from_writer(sink);
    let mut header = SCAN_HEADER.to_vec();
    if multi {
        header.push("psi_index");
    }
    w.write_record(&header)?;
    for r in results {
        for i in 0..r.energies.len() {
            let mut row = vec![
                r.energies[i].to_string(),
                r.mean_neg_h[i].to_string(),
                r.stderr[i].to_string(),
                r.n_rounds[i].to_string(),
            ];
            if multi {
                row.push(r.psi_index.to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a scan or oracle table. `stderr` defaults to 0 and `n_rounds` to 1
/// when absent; rows are grouped by `psi_index` when present.
pub fn read_scan<R: Read>(source: R) -> Result<Vec<ScanResult>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(source);
    let headers = rd.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(e_col), Some(h_col)) = (col("energy"), col("neg_h_mean")) else {
        bail!("table needs energy and neg_h_mean columns");
    };
    let (se_col, n_col, psi_col) = (col("stderr"), col("n_rounds"), col("psi_index"));

    let mut results: Vec<ScanResult> = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |c: usize| -> Result<&str> {
            row.get(c).with_context(|| format!("line {line}: missing column {}", &headers[c]))
        };
        let num = |c: usize| -> Result<f64> {
            field(c)?
                .trim()
                .parse::<f64>()
                .with_context(|| format!("line {line}: bad {} value", &headers[c]))
        };
        let psi = match psi_col {
            Some(c) => field(c)?
                .trim()
                .parse::<usize>()
                .with_context(|| format!("line {line}: bad psi_index"))?,
            None => 0,
        };
        let n_rounds = match n_col {
            Some(c) => field(c)?
                .trim()
                .parse::<usize>()
                .with_context(|| format!("line {line}: bad n_rounds"))?,
            None => 1,
        };
        let slot = match results.iter().position(|r| r.psi_index == psi) {
            Some(k) => k,
            None => {
                results.push(ScanResult {
                    psi_index: psi,
                    energies: Vec::new(),
                    mean_neg_h: Vec::new(),
                    stderr: Vec::new(),
                    n_rounds: Vec::new(),
                    peaks: Vec::new(),
                });
                results.len() - 1
            }
        };
        let r = &mut results[slot];
        r.energies.push(num(e_col)?);
        r.mean_neg_h.push(num(h_col)?);
        r.stderr.push(match se_col {
            Some(c) => num(c)?,
            None => 0.0,
        });
        r.n_rounds.push(n_rounds);
    }
    for r in &results {
        if r.energies.windows(2).any(|w| w[0] >= w[1]) {
            bail!("energies for psi_index {} are not strictly increasing", r.psi_index);
        }
    }
    results.sort_by_key(|r| r.psi_index);
    Ok(results)
}

/// `energy,neg_h_mean` with an optional `psi_index` column.
pub fn write_curves<W: Write>(energies: &[f64], curves: &[Vec<f64>], sink: W) -> Result<()> {
    let multi = curves.len() > 1;
    let mut w = csv::Writer::from_writer(sink);
    if multi {
        w.write_record(["energy", "neg_h_mean", "psi_index"])?;
    } else {
        w.write_record(["energy", "neg_h_mean"])?;
    }
    for (p, curve) in curves.iter().enumerate() {
        for (e, v) in energies.iter().zip(curve) {
            if multi {
                w.write_record([e.to_string(), v.to_string(), p.to_string()])?;
            } else {
                w.write_record([e.to_string(), v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(psi_index: usize) -> ScanResult {
        ScanResult {
            psi_index,
            energies: vec![-1.0, 0.1, 1.0 / 3.0],
            mean_neg_h: vec![0.25, -1e-17, 0.9999999999999999],
            stderr: vec![0.0, 0.01, 0.123456789],
            n_rounds: vec![50, 50, 1],
            peaks: Vec::new(),
        }
    }

    #[test]
    fn single_state_round_trip() {
        let mut buf = Vec::new();
        write_scan(&[result(0)], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("energy,neg_h_mean,stderr,n_rounds\n"));
        assert_eq!(read_scan(&buf[..]).unwrap(), vec![result(0)]);
    }

    #[test]
    fn multi_state_round_trip() {
        let mut buf = Vec::new();
        write_scan(&[result(0), result(1)], &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with(
            "energy,neg_h_mean,stderr,n_rounds,psi_index\n"
        ));
        assert_eq!(read_scan(&buf[..]).unwrap(), vec![result(0), result(1)]);
    }

    #[test]
    fn oracle_tables_read_with_defaults() {
        let mut buf = Vec::new();
        write_curves(&[0.0, 1.0], &[vec![0.5, 0.25]], &mut buf).unwrap();
        let r = read_scan(&buf[..]).unwrap();
        assert_eq!(r[0].stderr, vec![0.0, 0.0]);
        assert_eq!(r[0].n_rounds, vec![1, 1]);
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(read_scan("x,y\n1,2\n".as_bytes()).is_err());
        assert!(read_scan("energy,neg_h_mean\n1,abc\n".as_bytes()).is_err());
        assert!(read_scan("energy,neg_h_mean\n1,0\n0,0\n".as_bytes()).is_err());
    }
}
