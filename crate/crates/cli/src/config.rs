//! Experiment configuration: a JSON document naming states, observables, the
//! circuit variant, and sampling parameters.
//!
//! States and observables are written either inline (matrices as row-major
//! `[re, im]` lists with explicit dimensions, kets as `[re, im]` lists) or as
//! named presets. The `CSWAP_TOL` environment variable overrides the default
//! validation tolerance.

use cswap_core::protocol::ControlMode;
use cswap_core::qmath::{self, CMatrix, CVector};
use cswap_core::qobjects::{noisy_measurement, DensityMatrix, Povm, UnbiasedObservable};
use cswap_core::serial::{vector_from_pairs, MatrixData};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig1d,
    Exact,
    Twotime,
    Purify,
    Plan,
}

impl Variant {
    pub fn is_estimation(self) -> bool {
        matches!(
            self,
            Variant::Fig1a | Variant::Fig1b | Variant::Fig1c | Variant::Fig1d
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// A state: a named preset, a ket (normalized on load), or an inline density
/// matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Preset {
        preset: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Ket {
        ket: Vec<[f64; 2]>,
    },
    Matrix {
        matrix: MatrixData,
    },
}

/// An observable: a Pauli name, an inline Hermitian matrix (measured
/// projectively), a noisy measurement of a base observable, or an explicit
/// POVM decomposition with outcome values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Pauli {
        pauli: String,
    },
    Noisy {
        noisy: NoisySpec,
    },
    Decomposition {
        povm: Vec<MatrixData>,
        values: Vec<f64>,
    },
    Matrix {
        matrix: MatrixData,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisySpec {
    pub base: Box<ObservableSpec>,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_in: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_fin: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_joint: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable_b: Option<ObservableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_observable: Option<ObservableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ControlMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_guess: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config("<config>", e))
    }
}

/// Validation tolerance: `CSWAP_TOL` when set, the library default otherwise.
pub fn tolerance() -> f64 {
    std::env::var("CSWAP_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|t| *t > 0.0)
        .unwrap_or(qmath::DEFAULT_TOL)
}

fn named_ket(name: &str) -> Option<CVector> {
    Some(match name {
        "zero" => qmath::ket_zero(),
        "one" => qmath::ket_one(),
        "plus" => qmath::ket_plus(),
        "minus" => qmath::ket_minus(),
        "plus_i" => qmath::ket_plus_i(),
        "minus_i" => qmath::ket_minus_i(),
        _ => return None,
    })
}

fn bell_vector(kind: &str) -> Option<CVector> {
    let h = 1.0 / 2f64.sqrt();
    let amp = |entries: [(usize, f64); 2]| {
        let mut v = CVector::zeros(4);
        for (i, a) in entries {
            v[i] = num_complex::Complex64::new(a, 0.0);
        }
        v
    };
    Some(match kind {
        "bell" | "bell_phi_plus" => amp([(0, h), (3, h)]),
        "bell_phi_minus" => amp([(0, h), (3, -h)]),
        "bell_psi_plus" => amp([(1, h), (2, h)]),
        "bell_psi_minus" | "singlet" => amp([(1, h), (2, -h)]),
        _ => return None,
    })
}

/// Resolve a state spec into a density matrix.
///
/// Presets: the qubit kets `zero|one|plus|minus|plus_i|minus_i`,
/// `max_mixed` (with `dim`), the Bell states
/// `bell|bell_phi_plus|bell_phi_minus|bell_psi_plus|bell_psi_minus|singlet`,
/// `werner` with `p` (p·singlet + (1−p)·I/4), and `depolarized` with `p`
/// ((1−p)·|0⟩⟨0| + p·I/d, `dim` defaulting to 2).
pub fn build_state(spec: &StateSpec, field: &str, tol: f64) -> Result<DensityMatrix, CliError> {
    let err = |msg: &dyn std::fmt::Display| CliError::config(field, msg);
    match spec {
        StateSpec::Ket { ket } => {
            if ket.is_empty() {
                return Err(CliError::config(
                    field,
                    "ket must have at least one amplitude",
                ));
            }
            let v = vector_from_pairs(ket);
            if v.norm() <= 1e-12 {
                return Err(CliError::config(field, "ket has zero norm"));
            }
            DensityMatrix::from_pure(&v).map_err(|e| err(&e))
        }
        StateSpec::Matrix { matrix } => {
            let m = matrix.to_matrix().map_err(|e| err(&e))?;
            let d = (m.nrows() as f64).sqrt().round() as usize;
            if d * d == m.nrows() && d > 1 {
                DensityMatrix::bipartite_with_tol(m, d, d, tol).map_err(|e| err(&e))
            } else {
                DensityMatrix::with_tol(m, tol).map_err(|e| err(&e))
            }
        }
        StateSpec::Preset { preset, p, dim } => {
            if let Some(v) = named_ket(preset) {
                return DensityMatrix::from_pure(&v).map_err(|e| err(&e));
            }
            if let Some(v) = bell_vector(preset) {
                let m = qmath::projector(&v);
                return DensityMatrix::bipartite_with_tol(m, 2, 2, tol).map_err(|e| err(&e));
            }
            match preset.as_str() {
                "max_mixed" => {
                    let d = dim.unwrap_or(2);
                    if d == 0 {
                        return Err(CliError::config(field, "dim must be positive"));
                    }
                    let m = qmath::identity(d).unscale(d as f64);
                    if let Some(f) = perfect_square(d) {
                        DensityMatrix::bipartite_with_tol(m, f, f, tol).map_err(|e| err(&e))
                    } else {
                        DensityMatrix::with_tol(m, tol).map_err(|e| err(&e))
                    }
                }
                "werner" => {
                    let p = p.ok_or_else(|| {
                        CliError::config(field, "werner preset requires a mixing parameter p")
                    })?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(CliError::config(field, "werner p must lie in [0, 1]"));
                    }
                    let singlet = bell_vector("singlet").expect("known preset");
                    let m = qmath::projector(&singlet).scale(p)
                        + qmath::identity(4).scale((1.0 - p) / 4.0);
                    DensityMatrix::bipartite_with_tol(m, 2, 2, tol).map_err(|e| err(&e))
                }
                "depolarized" => {
                    let p = p.ok_or_else(|| {
                        CliError::config(field, "depolarized preset requires a noise level p")
                    })?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(CliError::config(field, "depolarized p must lie in [0, 1]"));
                    }
                    let d = dim.unwrap_or(2);
                    let m = qmath::projector(&qmath::basis_state(d, 0)).scale(1.0 - p)
                        + qmath::identity(d).scale(p / d as f64);
                    DensityMatrix::with_tol(m, tol).map_err(|e| err(&e))
                }
                other => Err(CliError::config(
                    field,
                    format!("unknown state preset `{other}`"),
                )),
            }
        }
    }
}

fn perfect_square(n: usize) -> Option<usize> {
    let f = (n as f64).sqrt().round() as usize;
    (f > 1 && f * f == n).then_some(f)
}

fn pauli_by_name(name: &str) -> Option<CMatrix> {
    Some(match name {
        "I" | "id" => qmath::identity(2),
        "X" => qmath::pauli_x(),
        "Y" => qmath::pauli_y(),
        "Z" => qmath::pauli_z(),
        _ => return None,
    })
}

/// Resolve an observable spec into an unbiased measurement.
///
/// Plain matrices and Pauli names are measured projectively; `noisy` wraps a
/// base observable in the depolarized POVM; an explicit decomposition gives
/// the POVM and values directly.
pub fn build_observable(
    spec: &ObservableSpec,
    field: &str,
    tol: f64,
) -> Result<UnbiasedObservable, CliError> {
    let err = |msg: &dyn std::fmt::Display| CliError::config(field, msg);
    match spec {
        ObservableSpec::Pauli { pauli } => {
            let m = pauli_by_name(pauli)
                .ok_or_else(|| CliError::config(field, format!("unknown Pauli `{pauli}`")))?;
            UnbiasedObservable::projective(&m).map_err(|e| err(&e))
        }
        ObservableSpec::Matrix { matrix } => {
            let m = matrix.to_matrix().map_err(|e| err(&e))?;
            UnbiasedObservable::projective(&m).map_err(|e| err(&e))
        }
        ObservableSpec::Noisy { noisy } => {
            let base = build_observable(&noisy.base, field, tol)?;
            noisy_measurement(base.observable(), noisy.p, noisy.lambda.as_deref())
                .map_err(|e| err(&e))
        }
        ObservableSpec::Decomposition { povm, values } => {
            let elements = povm
                .iter()
                .map(|m| m.to_matrix())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(&e))?;
            let povm = Povm::with_tol(elements, tol).map_err(|e| err(&e))?;
            UnbiasedObservable::new(povm, values.clone()).map_err(|e| err(&e))
        }
    }
}
