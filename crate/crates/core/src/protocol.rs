//! Exact outcome distributions of the controlled-SWAP circuit and its three
//! variants.
//!
//! The base circuit prepares two system copies in `rho_in` and `rho_fin` and
//! a control qubit in |+⟩, applies the controlled-SWAP gate
//! U = I ⊗ I ⊗ |0⟩⟨0| + SWAP ⊗ |1⟩⟨1|, measures the first copy with a POVM
//! (P_j)_j, and measures the control with the four-outcome POVM
//! R_0 = |+⟩⟨+|/2, R_1 = |−⟩⟨−|/2, R_2 = |+i⟩⟨+i|/2, R_3 = |−i⟩⟨−i|/2.
//! The joint outcome (j, c) then occurs with probability
//!
//! ```text
//! p(j,c) = 1/8 { Tr[P_j rho_in] + Tr[P_j rho_fin]
//!                + 2 θ(1−c) (−1)^c Re Tr[P_j rho_in rho_fin]
//!                − 2 θ(c−2) (−1)^c Im Tr[P_j rho_in rho_fin] }
//! ```
//!
//! with θ the Heaviside step (θ(t) = 1 for t ≥ 0). [`dist_fig1a`] evaluates
//! this closed form; [`circuit_oracle_fig1a`] builds the full circuit state
//! and measures it directly, serving as an independent oracle. The variants
//! measure both copies ([`dist_fig1b`]), accept a joint input state
//! ([`dist_fig1c`]), or measure both copies jointly ([`dist_fig1d`]).
//!
//! Outcome tables are indexed row-major over (j[, k], c) with the control
//! outcome fastest; this layout is fixed for serialization stability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{self, CMatrix};
use crate::qobjects::{DensityMatrix, Povm};

/// Negative probabilities no larger than this in magnitude are treated as
/// floating-point dust and clipped to zero; anything larger is a hard error.
pub const PROB_CLIP: f64 = 1e-12;

/// Tolerance on the total probability mass before renormalization.
pub const PROB_SUM_TOL: f64 = 1e-10;

/// How the four-outcome control measurement is realized when sampling.
///
/// `Random4` draws from the full four-outcome table, as the protocol is
/// stated. `Split` derandomizes it: half of the runs measure the projective
/// pair {2R_0, 2R_1} (the X basis) and half measure {2R_2, 2R_3} (the Y
/// basis). The error bounds of the estimator module are proved for the split
/// realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlMode {
    Split,
    Random4,
}

/// The four-outcome control POVM (R_0, R_1, R_2, R_3).
pub fn control_povm() -> [CMatrix; 4] {
    let half = |v: &crate::qmath::CVector| qmath::projector(v).scale(0.5);
    [
        half(&qmath::ket_plus()),
        half(&qmath::ket_minus()),
        half(&qmath::ket_plus_i()),
        half(&qmath::ket_minus_i()),
    ]
}

/// The controlled-SWAP gate on H_S1 ⊗ H_S2 ⊗ H_C with the control last.
pub fn controlled_swap(d: usize) -> CMatrix {
    let e0 = qmath::basis_state(2, 0);
    let e1 = qmath::basis_state(2, 1);
    qmath::kron(&qmath::identity(d * d), &qmath::outer(&e0, &e0))
        + qmath::kron(&qmath::swap_operator(d), &qmath::outer(&e1, &e1))
}

/// A normalized probability table over outcomes (j[, k], c) with c ∈ {0..3}
/// fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    /// Number of system outcomes: j, or flattened (j, k) pairs.
    system_outcomes: usize,
    /// Present when system outcomes are flattened (j, k) pairs.
    pair_shape: Option<(usize, usize)>,
    probs: Vec<f64>,
}

impl<'de> Deserialize<'de> for OutcomeDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            system_outcomes: usize,
            pair_shape: Option<(usize, usize)>,
            probs: Vec<f64>,
        }
        let repr = Repr::deserialize(d)?;
        if repr.probs.len() != repr.system_outcomes * 4 {
            return Err(serde::de::Error::custom(Error::LengthMismatch {
                expected: repr.system_outcomes * 4,
                found: repr.probs.len(),
            }));
        }
        if let Some((nj, nk)) = repr.pair_shape {
            if nj * nk != repr.system_outcomes {
                return Err(serde::de::Error::custom(Error::DimensionMismatch {
                    expected: repr.system_outcomes,
                    found: nj * nk,
                }));
            }
        }
        OutcomeDistribution::from_raw(repr.probs, repr.pair_shape)
            .map_err(serde::de::Error::custom)
    }
}

impl OutcomeDistribution {
    fn from_raw(mut probs: Vec<f64>, pair_shape: Option<(usize, usize)>) -> Result<Self> {
        let system_outcomes = probs.len() / 4;
        if let Some((nj, nk)) = pair_shape {
            debug_assert_eq!(nj * nk, system_outcomes);
        }
        for p in probs.iter_mut() {
            if *p < -PROB_CLIP {
                return Err(Error::NegativeProbability { value: *p });
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::DistributionNotNormalized { sum });
        }
        for p in probs.iter_mut() {
            *p /= sum;
        }
        Ok(OutcomeDistribution {
            system_outcomes,
            pair_shape,
            probs,
        })
    }

    pub fn system_outcomes(&self) -> usize {
        self.system_outcomes
    }

    pub fn pair_shape(&self) -> Option<(usize, usize)> {
        self.pair_shape
    }

    /// p(sys, c); `sys` is j or the flattened pair index j·n_k + k.
    pub fn prob(&self, sys: usize, c: usize) -> f64 {
        self.probs[sys * 4 + c]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Marginal over the control outcome.
    pub fn system_marginal(&self) -> Vec<f64> {
        (0..self.system_outcomes)
            .map(|s| self.probs[s * 4..s * 4 + 4].iter().sum())
            .collect()
    }

    /// Conditional distribution of the X-basis (real-part) projective pair
    /// {2R_0, 2R_1}: entries (sys, c̄) with c̄ ∈ {0, 1}, each table summing
    /// to one.
    pub fn conditional_re(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.system_outcomes * 2);
        for s in 0..self.system_outcomes {
            out.push(2.0 * self.prob(s, 0));
            out.push(2.0 * self.prob(s, 1));
        }
        out
    }

    /// Conditional distribution of the Y-basis (imaginary-part) pair
    /// {2R_2, 2R_3}.
    pub fn conditional_im(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.system_outcomes * 2);
        for s in 0..self.system_outcomes {
            out.push(2.0 * self.prob(s, 2));
            out.push(2.0 * self.prob(s, 3));
        }
        out
    }

    /// Sum a pair-shaped table over the second outcome index.
    pub fn marginal_over_second(&self) -> Result<OutcomeDistribution> {
        let (nj, nk) = self.pair_shape.ok_or(Error::Empty { what: "pair shape" })?;
        let mut probs = vec![0.0; nj * 4];
        for j in 0..nj {
            for k in 0..nk {
                for c in 0..4 {
                    probs[j * 4 + c] += self.prob(j * nk + k, c);
                }
            }
        }
        OutcomeDistribution::from_raw(probs, None)
    }
}

/// Closed-form outcome distribution of the base circuit.
pub fn dist_fig1a(
    povm: &Povm,
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
) -> Result<OutcomeDistribution> {
    let d = rho_in.dim();
    if rho_fin.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho_fin.dim(),
        });
    }
    if povm.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: povm.dim(),
        });
    }
    let cross = rho_in.matrix() * rho_fin.matrix();
    let mut probs = Vec::with_capacity(povm.len() * 4);
    for p_j in povm.elements() {
        let t_in = (p_j * rho_in.matrix()).trace().re;
        let t_fin = (p_j * rho_fin.matrix()).trace().re;
        let q: Complex64 = (p_j * &cross).trace();
        let base = t_in + t_fin;
        probs.push((base + 2.0 * q.re) / 8.0);
        probs.push((base - 2.0 * q.re) / 8.0);
        probs.push((base - 2.0 * q.im) / 8.0);
        probs.push((base + 2.0 * q.im) / 8.0);
    }
    OutcomeDistribution::from_raw(probs, None)
}

/// Shared circuit-level evaluation: prepare `sigma ⊗ |+⟩⟨+|`, apply the
/// controlled-SWAP, and measure with the joint system POVM and the control
/// POVM.
fn cswap_circuit(
    sigma: &CMatrix,
    d: usize,
    meas: &[CMatrix],
    pair_shape: Option<(usize, usize)>,
) -> Result<OutcomeDistribution> {
    let plus = qmath::ket_plus();
    let omega = qmath::kron(sigma, &qmath::projector(&plus));
    let u = controlled_swap(d);
    let evolved = &u * omega * u.adjoint();
    let control = control_povm();
    let mut probs = Vec::with_capacity(meas.len() * 4);
    for m in meas {
        for r in &control {
            let effect = qmath::kron(m, r);
            probs.push((effect * &evolved).trace().re);
        }
    }
    OutcomeDistribution::from_raw(probs, pair_shape)
}

/// Circuit-level oracle for [`dist_fig1a`]: builds the full tripartite state
/// and measures (P_j ⊗ I ⊗ R_c) directly, with no reference to the closed
/// form.
pub fn circuit_oracle_fig1a(
    povm: &Povm,
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
) -> Result<OutcomeDistribution> {
    let d = rho_in.dim();
    if rho_fin.dim() != d || povm.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho_fin.dim().min(povm.dim()),
        });
    }
    let sigma = qmath::kron(rho_in.matrix(), rho_fin.matrix());
    let meas: Vec<CMatrix> = povm
        .elements()
        .iter()
        .map(|p| qmath::kron(p, &qmath::identity(d)))
        .collect();
    cswap_circuit(&sigma, d, &meas, None)
}

/// Both copies measured: outcomes (j, k, c) with
/// p(j,k,c) = Tr[(P_j ⊗ Q_k ⊗ R_c) U (rho_in ⊗ rho_fin ⊗ |+⟩⟨+|) U†].
pub fn dist_fig1b(
    povm_a: &Povm,
    povm_b: &Povm,
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
) -> Result<OutcomeDistribution> {
    let d = rho_in.dim();
    if rho_fin.dim() != d || povm_a.dim() != d || povm_b.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: povm_b.dim(),
        });
    }
    let sigma = qmath::kron(rho_in.matrix(), rho_fin.matrix());
    joint_measurement_circuit(&sigma, d, povm_a, povm_b)
}

/// A single bipartite input state replacing the two uncorrelated copies.
pub fn dist_fig1c(
    povm_a: &Povm,
    povm_b: &Povm,
    rho_joint: &DensityMatrix,
) -> Result<OutcomeDistribution> {
    let d = rho_joint.equal_bipartite_dim()?;
    if povm_a.dim() != d || povm_b.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: povm_a.dim().min(povm_b.dim()),
        });
    }
    joint_measurement_circuit(rho_joint.matrix(), d, povm_a, povm_b)
}

fn joint_measurement_circuit(
    sigma: &CMatrix,
    d: usize,
    povm_a: &Povm,
    povm_b: &Povm,
) -> Result<OutcomeDistribution> {
    let mut meas = Vec::with_capacity(povm_a.len() * povm_b.len());
    for p in povm_a.elements() {
        for q in povm_b.elements() {
            meas.push(qmath::kron(p, q));
        }
    }
    cswap_circuit(sigma, d, &meas, Some((povm_a.len(), povm_b.len())))
}

/// A joint POVM on both copies: outcomes (j, c) with
/// p(j,c) = Tr[(Π_j ⊗ R_c) U (rho_joint ⊗ |+⟩⟨+|) U†].
pub fn dist_fig1d(joint_povm: &Povm, rho_joint: &DensityMatrix) -> Result<OutcomeDistribution> {
    let d = rho_joint.equal_bipartite_dim()?;
    if joint_povm.dim() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: joint_povm.dim(),
        });
    }
    cswap_circuit(rho_joint.matrix(), d, joint_povm.elements(), None)
}

/// Complex measure induced by the two-POVM circuit on uncorrelated copies:
/// q(j,k) = Tr[P_j rho_in Q_k rho_fin], flattened with k fastest.
pub fn measure_fig1b(
    povm_a: &Povm,
    povm_b: &Povm,
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(povm_a.len() * povm_b.len());
    for p in povm_a.elements() {
        for q in povm_b.elements() {
            out.push((p * rho_in.matrix() * q * rho_fin.matrix()).trace());
        }
    }
    out
}

/// Complex measure induced by the bipartite-state circuit:
/// q(j,k) = Tr[(P_j ⊗ Q_k) rho_joint SWAP].
pub fn measure_fig1c(
    povm_a: &Povm,
    povm_b: &Povm,
    rho_joint: &DensityMatrix,
) -> Result<Vec<Complex64>> {
    let d = rho_joint.equal_bipartite_dim()?;
    let swap = qmath::swap_operator(d);
    let tail = rho_joint.matrix() * &swap;
    let mut out = Vec::with_capacity(povm_a.len() * povm_b.len());
    for p in povm_a.elements() {
        for q in povm_b.elements() {
            out.push((qmath::kron(p, q) * &tail).trace());
        }
    }
    Ok(out)
}

/// Complex measure induced by the joint-POVM circuit:
/// q(j) = Tr[Π_j rho_joint SWAP].
pub fn measure_fig1d(joint_povm: &Povm, rho_joint: &DensityMatrix) -> Result<Vec<Complex64>> {
    let d = rho_joint.equal_bipartite_dim()?;
    let swap = qmath::swap_operator(d);
    let tail = rho_joint.matrix() * &swap;
    Ok(joint_povm
        .elements()
        .iter()
        .map(|pi| (pi * &tail).trace())
        .collect())
}
