//! Line-delimited JSON ride records.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::config::ModelSpec;
use crate::engine::ShotCounts;
use crate::error::{Error, Result};
use crate::states::PsiSpec;

/// Per-ancilla readout: exact `⟨σ_z⟩_k` or `[n_up, n_down]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Zeta {
    Exact(Vec<f64>),
    Shots(Vec<[u64; 2]>),
}

impl Zeta {
    pub fn len(&self) -> usize {
        match self {
            Zeta::Exact(z) => z.len(),
            Zeta::Shots(z) => z.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn from_counts(counts: &[ShotCounts]) -> Self {
        Zeta::Shots(counts.iter().map(|c| [c.n_up, c.n_down]).collect())
    }

    /// Per-ancilla expectations, converting counts via `(n_up − n_down)/(n_up + n_down)`.
    pub fn expectations(&self) -> Vec<f64> {
        match self {
            Zeta::Exact(z) => z.clone(),
            Zeta::Shots(z) => z
                .iter()
                .map(|&[up, down]| ShotCounts { n_up: up, n_down: down }.expectation())
                .collect(),
        }
    }
}

/// One ride. Field order is the on-disk order: readout, then times, trial
/// energy, time parameters, model and initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RideRecord {
    pub ride_index: u64,
    pub psi_index: usize,
    pub grid_index: usize,
    pub round: usize,
    pub times: Vec<f64>,
    #[serde(rename = "E")]
    pub energy: f64,
    pub d: f64,
    pub tau: f64,
    pub model: ModelSpec,
    pub psi: PsiSpec,
    pub mode: RecordMode,
    pub zeta: Zeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordMode {
    Exact,
    Shots,
}

impl RideRecord {
    /// Mean over ancillas of `ζ_k`.
    pub fn score(&self) -> f64 {
        let z = self.zeta.expectations();
        z.iter().sum::<f64>() / z.len() as f64
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.zeta.is_empty() {
            return Err("zeta is empty".into());
        }
        if self.zeta.len() != self.times.len() {
            return Err(format!(
                "zeta has {} entries but times has {}",
                self.zeta.len(),
                self.times.len()
            ));
        }
        match (self.mode, &self.zeta, self.shots) {
            (RecordMode::Exact, Zeta::Exact(_), None) => Ok(()),
            (RecordMode::Shots, Zeta::Shots(z), Some(s)) => {
                if s == 0 || z.iter().any(|&[u, dn]| u + dn != s) {
                    Err(format!("shot counts do not sum to shots = {s}"))
                } else {
                    Ok(())
                }
            }
            (RecordMode::Shots, _, None) => Err("shot record without shots".into()),
            (RecordMode::Exact, _, Some(_)) => Err("exact record carries shots".into()),
            _ => Err("zeta does not match mode".into()),
        }
    }
}

pub fn write_dataset<W: Write>(records: &[RideRecord], mut sink: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut sink, r)
            .map_err(|e| Error::InvalidParameter(format!("serializing ride {}: {e}", r.ride_index)))?;
        sink.write_all(b"\n").map_err(|source| Error::Io {
            context: "writing dataset".into(),
            source,
        })?;
    }
    sink.flush().map_err(|source| Error::Io { context: "writing dataset".into(), source })
}

/// Reads records written by [`write_dataset`]; blank lines are skipped.
pub fn read_dataset<R: BufRead>(source: R) -> Result<Vec<RideRecord>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line.map_err(|source| Error::Io { context: "reading dataset".into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RideRecord = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedRecord { line: i + 1, message: e.to_string() })?;
        record.check().map_err(|message| Error::MalformedRecord { line: i + 1, message })?;
        out.push(record);
    }
    Ok(out)
}
