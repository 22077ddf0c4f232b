//! Initial-state descriptors shared by the oracle, the harness and the dataset.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{u3, StateVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellLabel {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] =
        [BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus, BellLabel::PsiMinus];

    /// Amplitudes over `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn amplitudes(self) -> [f64; 4] {
        let h = FRAC_1_SQRT_2;
        match self {
            BellLabel::PhiPlus => [h, 0.0, 0.0, h],
            BellLabel::PhiMinus => [h, 0.0, 0.0, -h],
            BellLabel::PsiPlus => [0.0, h, h, 0.0],
            BellLabel::PsiMinus => [0.0, h, -h, 0.0],
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        })
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "phi+" => Ok(BellLabel::PhiPlus),
            "phi-" => Ok(BellLabel::PhiMinus),
            "psi+" => Ok(BellLabel::PsiPlus),
            "psi-" => Ok(BellLabel::PsiMinus),
            other => Err(Error::InvalidState(format!("unknown Bell label {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BellFamily {
    Phi,
    Psi,
}

/// Initial system state `|ψ_I⟩`.
///
/// `Mix { family: Phi, alpha }` is the partially entangled state
/// `cos α|00⟩ + sin α|11⟩`, whose level weights are `cos²α` at `|00⟩` and
/// `sin²α` at `|11⟩`. `Mix { family: Psi, alpha }` is `cos α Ψ⁺ + sin α Ψ⁻`,
/// which stays inside the degenerate `|01⟩, |10⟩` level for every α.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiSpec {
    /// `(θ, φ)` per qubit; qubit state `U3(θ, φ, 0)|0⟩ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    Angles(Vec<[f64; 2]>),
    Bell(BellLabel),
    /// `[re, im]` per basis state; rescaled to unit norm.
    Amplitudes(Vec<[f64; 2]>),
    Mix { family: BellFamily, alpha: f64 },
}

impl PsiSpec {
    /// Number of system qubits this descriptor implies.
    pub fn num_qubits(&self) -> Result<usize> {
        match self {
            PsiSpec::Angles(a) => Ok(a.len()),
            PsiSpec::Bell(_) | PsiSpec::Mix { .. } => Ok(2),
            PsiSpec::Amplitudes(a) => {
                if a.is_empty() || !a.len().is_power_of_two() {
                    Err(Error::InvalidState(format!("{} amplitudes is not a power of two", a.len())))
                } else {
                    Ok(a.len().trailing_zeros() as usize)
                }
            }
        }
    }

    pub fn to_state(&self) -> Result<StateVector> {
        match self {
            PsiSpec::Angles(angles) => {
                if angles.is_empty() {
                    return Err(Error::InvalidState("no qubit angles given".into()));
                }
                let mut state: Option<StateVector> = None;
                for &[theta, phi] in angles {
                    if !theta.is_finite() || !phi.is_finite() {
                        return Err(Error::InvalidState("non-finite angle".into()));
                    }
                    let mut q = StateVector::zero(1)?;
                    q.apply_single_qubit_gate(&u3(theta, phi, 0.0), 0)?;
                    state = Some(match state {
                        None => q,
                        Some(s) => s.tensor(&q)?,
                    });
                }
                Ok(state.expect("non-empty angles"))
            }
            PsiSpec::Bell(label) => StateVector::from_amplitudes(
                label.amplitudes().iter().map(|&a| C64::new(a, 0.0)).collect(),
            ),
            PsiSpec::Amplitudes(amps) => {
                StateVector::normalized(amps.iter().map(|&[re, im]| C64::new(re, im)).collect())
            }
            PsiSpec::Mix { family, alpha } => {
                if !alpha.is_finite() {
                    return Err(Error::InvalidState("non-finite mixing angle".into()));
                }
                let (c, s) = (alpha.cos(), alpha.sin());
                let amps = match family {
                    BellFamily::Phi => [c, 0.0, 0.0, s],
                    BellFamily::Psi => {
                        let h = FRAC_1_SQRT_2;
                        [0.0, h * (c + s), h * (c - s), 0.0]
                    }
                };
                StateVector::normalized(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
            }
        }
    }
}

/// Parses the command-line grammar:
/// `theta=X[,phi=Y][;theta=…]`, `bell=phi+|phi-|psi+|psi-`, `mix=phi:ALPHA`,
/// `mix=psi:ALPHA`. Amplitude files are handled by the caller.
impl FromStr for PsiSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("bell=") {
            return Ok(PsiSpec::Bell(rest.parse()?));
        }
        if let Some(rest) = s.strip_prefix("mix=") {
            let (fam, alpha) = rest
                .split_once(':')
                .ok_or_else(|| Error::InvalidState(format!("expected mix=FAMILY:ALPHA, got {s:?}")))?;
            let family = match fam.trim() {
                "phi" => BellFamily::Phi,
                "psi" => BellFamily::Psi,
                other => return Err(Error::InvalidState(format!("unknown mix family {other:?}"))),
            };
            let alpha = parse_angle(alpha)?;
            return Ok(PsiSpec::Mix { family, alpha });
        }
        if s.starts_with("theta=") {
            let mut angles = Vec::new();
            for qubit in s.split(';').filter(|q| !q.trim().is_empty()) {
                let mut theta = None;
                let mut phi = 0.0;
                for part in qubit.split(',') {
                    let (key, value) = part
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidState(format!("expected key=value in {part:?}")))?;
                    match key.trim() {
                        "theta" => theta = Some(parse_angle(value)?),
                        "phi" => phi = parse_angle(value)?,
                        other => {
                            return Err(Error::InvalidState(format!("unknown angle key {other:?}")))
                        }
                    }
                }
                let theta =
                    theta.ok_or_else(|| Error::InvalidState(format!("missing theta in {qubit:?}")))?;
                angles.push([theta, phi]);
            }
            return Ok(PsiSpec::Angles(angles));
        }
        Err(Error::InvalidState(format!("unrecognized state descriptor {s:?}")))
    }
}

/// Accepts plain numbers plus `pi`, `pi/K`, `K*pi` and `K*pi/L` forms.
pub fn parse_angle(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::InvalidState(format!("bad angle {s:?}"));
    if let Ok(v) = s.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s, 1.0),
    };
    let coeff = if num == "pi" {
        1.0
    } else if let Some(c) = num.strip_suffix("pi").map(|c| c.trim_end_matches('*')) {
        c.trim().parse::<f64>().map_err(|_| bad())?
    } else {
        return Err(bad());
    };
    let v = coeff * std::f64::consts::PI / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn parse_grammar() {
        assert_eq!("theta=0".parse::<PsiSpec>().unwrap(), PsiSpec::Angles(vec![[0.0, 0.0]]));
        assert_eq!(
            "theta=pi/2,phi=0.5;theta=pi".parse::<PsiSpec>().unwrap(),
            PsiSpec::Angles(vec![[PI / 2.0, 0.5], [PI, 0.0]])
        );
        assert_eq!("bell=psi-".parse::<PsiSpec>().unwrap(), PsiSpec::Bell(BellLabel::PsiMinus));
        assert_eq!(
            "mix=phi:0.6283".parse::<PsiSpec>().unwrap(),
            PsiSpec::Mix { family: BellFamily::Phi, alpha: 0.6283 }
        );
        assert_eq!(parse_angle("2*pi/5").unwrap(), 2.0 * PI / 5.0);
        assert_eq!(parse_angle("2pi/5").unwrap(), 2.0 * PI / 5.0);
        assert!("bell=chi".parse::<PsiSpec>().is_err());
        assert!("theta=x".parse::<PsiSpec>().is_err());
        assert!("mix=phi".parse::<PsiSpec>().is_err());
        assert!("foo".parse::<PsiSpec>().is_err());
    }

    #[test]
    fn angle_state_amplitudes() {
        let s = PsiSpec::Angles(vec![[1.0, 0.3]]).to_state().unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.5f64.cos(), epsilon = 1e-15);
        let b = s.amplitudes()[1];
        assert_abs_diff_eq!(b.norm(), 0.5f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.arg(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn mix_states() {
        let a = 0.4;
        let phi = PsiSpec::Mix { family: BellFamily::Phi, alpha: a }.to_state().unwrap();
        assert_abs_diff_eq!(phi.amplitudes()[0].re, a.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(phi.amplitudes()[3].re, a.sin(), epsilon = 1e-15);
        let psi = PsiSpec::Mix { family: BellFamily::Psi, alpha: a }.to_state().unwrap();
        let plus = PsiSpec::Bell(BellLabel::PsiPlus).to_state().unwrap();
        let minus = PsiSpec::Bell(BellLabel::PsiMinus).to_state().unwrap();
        assert_abs_diff_eq!(plus.inner(&psi).unwrap().re, a.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(minus.inner(&psi).unwrap().re, a.sin(), epsilon = 1e-15);
    }

    #[test]
    fn serde_shapes() {
        let cases = [
            (PsiSpec::Angles(vec![[0.5, 0.0]]), r#"{"angles":[[0.5,0.0]]}"#),
            (PsiSpec::Bell(BellLabel::PhiPlus), r#"{"bell":"phi+"}"#),
            (PsiSpec::Amplitudes(vec![[1.0, 0.0], [0.0, 1.0]]), r#"{"amplitudes":[[1.0,0.0],[0.0,1.0]]}"#),
            (
                PsiSpec::Mix { family: BellFamily::Psi, alpha: 0.25 },
                r#"{"mix":{"family":"psi","alpha":0.25}}"#,
            ),
        ];
        for (spec, json) in cases {
            assert_eq!(serde_json::to_string(&spec).unwrap(), json);
            assert_eq!(serde_json::from_str::<PsiSpec>(json).unwrap(), spec);
        }
    }

    #[test]
    fn amplitude_count_must_be_power_of_two() {
        assert!(PsiSpec::Amplitudes(vec![[1.0, 0.0]; 3]).to_state().is_err());
        assert!(PsiSpec::Amplitudes(vec![[0.0, 0.0]; 2]).to_state().is_err());
    }
}
