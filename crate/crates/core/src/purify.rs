//! Purification and extension constructions that reduce mixed-state and
//! generalized weak values to pure-state pre/post-selections.
//!
//! Three constructions are provided:
//!
//! - [`vaidman_purification`]: three auxiliary registers of dimension d turn
//!   a mixed-state weak value into a pure-state one,
//!   W(A | rho_in, rho_fin) = W(A⊗I⊗I⊗I | Ψ_in, Ψ_fin), with final overlap
//!   Tr[Ψ_in Ψ_fin] = Tr[rho_in rho_fin]/d.
//! - [`double_purification`]: two system copies and two auxiliaries reduce a
//!   double weak value, W₂(A, B | rho_in, rho_fin) =
//!   W(A⊗B⊗I⊗I | Γ_in, Γ_fin), with overlap (Tr[rho_in rho_fin])².
//! - [`av_extension`]: a general linear functional λ(A) = Σ_i ⟨ψ'_i|A|ψ_i⟩
//!   becomes a plain pre/post-selection on H ⊗ H_aux with an N-dimensional
//!   auxiliary, λ(A) = Λ(A ⊗ I_aux); the normalized ratios are expectation
//!   values of the product two-time state built from the extended vectors.
//!
//! Purification bases are the eigenbases of the input states, which makes
//! the constructions deterministic.

use crate::error::{Error, Result};
use crate::qmath::{self, CMatrix, CVector};
use crate::qobjects::DensityMatrix;
use crate::twotime::{self, TwoTimeState, TwoTimeVector};

/// Overlap threshold below which a purification is rejected as orthogonal.
pub const OVERLAP_TOL: f64 = 1e-12;

/// A pure pre/post-selected pair on a composite register.
#[derive(Debug, Clone, PartialEq)]
pub struct PurifiedPair {
    pub psi_in: CVector,
    pub psi_fin: CVector,
    /// Dimensions of the tensor registers, in order.
    pub register_dims: Vec<usize>,
    /// |⟨psi_fin|psi_in⟩|².
    pub overlap: f64,
}

impl PurifiedPair {
    fn from_vectors(psi_in: CVector, psi_fin: CVector, register_dims: Vec<usize>) -> Self {
        let overlap = psi_fin.dotc(&psi_in).norm_sqr();
        PurifiedPair {
            psi_in,
            psi_fin,
            register_dims,
            overlap,
        }
    }

    /// Total dimension of the composite register.
    pub fn dim(&self) -> usize {
        self.psi_in.len()
    }
}

/// Weights and eigenvectors of a state, in a fixed deterministic order.
fn eigenbasis(rho: &DensityMatrix) -> Result<(Vec<f64>, Vec<CVector>)> {
    rho.eigen_clipped()
}

/// Purification of a mixed-state weak value with three auxiliary registers.
///
/// Register order is (S, A1, A2, A3):
/// |Ψ_in⟩ = |Ψ⟩_{S A1} ⊗ |Ξ⟩_{A2 A3} and |Ψ_fin⟩ = |Φ⟩_{S A2} ⊗ |Γ⟩_{A1 A3},
/// where |Ψ⟩, |Φ⟩ purify rho_in, rho_fin over their eigenbases, |Ξ⟩ is the
/// normalized maximally entangled state, and
/// |Γ⟩ = Σ_{m,n} √(r_m r'_n) ⟨ψ'_n|ψ_m⟩ |m⟩|n⟩ / √Tr[rho_in rho_fin].
pub fn vaidman_purification(
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
) -> Result<PurifiedPair> {
    let d = rho_in.dim();
    if rho_fin.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho_fin.dim(),
        });
    }
    let mu = crate::analytics::overlap(rho_in, rho_fin);
    if mu <= OVERLAP_TOL {
        return Err(Error::OrthogonalPrePostSelection { overlap: mu.abs() });
    }
    let (r, psi) = eigenbasis(rho_in)?;
    let (rp, psi_p) = eigenbasis(rho_fin)?;

    // gamma[m, n] = √(r_m r'_n) <ψ'_n|ψ_m> / √μ; built exactly as defined,
    // its unit norm is a consequence asserted in tests rather than enforced
    let gamma = CMatrix::from_fn(d, d, |m, n| {
        psi_p[n].dotc(&psi[m]) * ((r[m] * rp[n]).sqrt() / mu.sqrt())
    });

    let dim = d * d * d * d;
    let inv_sqrt_d = 1.0 / (d as f64).sqrt();
    let mut psi_in = CVector::zeros(dim);
    let mut psi_fin = CVector::zeros(dim);
    for s in 0..d {
        for a1 in 0..d {
            for a2 in 0..d {
                for a3 in 0..d {
                    let idx = ((s * d + a1) * d + a2) * d + a3;
                    if a2 == a3 {
                        psi_in[idx] = psi[a1][s] * (r[a1].sqrt() * inv_sqrt_d);
                    }
                    psi_fin[idx] = psi_p[a2][s] * rp[a2].sqrt() * gamma[(a1, a3)];
                }
            }
        }
    }
    Ok(PurifiedPair::from_vectors(psi_in, psi_fin, vec![d; 4]))
}

/// Purification of a double weak value on two system copies and two
/// auxiliaries, register order (S1, S2, A1, A2):
/// |Γ_in⟩ = |Ψ⟩_{S1 A1} ⊗ |Φ⟩_{S2 A2} and |Γ_fin⟩ = |Φ⟩_{S1 A2} ⊗ |Ψ⟩_{S2 A1}.
pub fn double_purification(
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
) -> Result<PurifiedPair> {
    let d = rho_in.dim();
    if rho_fin.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho_fin.dim(),
        });
    }
    let mu = crate::analytics::overlap(rho_in, rho_fin);
    if mu <= OVERLAP_TOL {
        return Err(Error::OrthogonalPrePostSelection { overlap: mu.abs() });
    }
    let (r, psi) = eigenbasis(rho_in)?;
    let (rp, psi_p) = eigenbasis(rho_fin)?;

    // purification amplitudes: big_psi[s, m] = √r_m ψ_m[s]
    let big_psi = CMatrix::from_fn(d, d, |s, m| psi[m][s] * r[m].sqrt());
    let big_phi = CMatrix::from_fn(d, d, |s, n| psi_p[n][s] * rp[n].sqrt());

    let dim = d * d * d * d;
    let mut gamma_in = CVector::zeros(dim);
    let mut gamma_fin = CVector::zeros(dim);
    for s1 in 0..d {
        for s2 in 0..d {
            for a1 in 0..d {
                for a2 in 0..d {
                    let idx = ((s1 * d + s2) * d + a1) * d + a2;
                    gamma_in[idx] = big_psi[(s1, a1)] * big_phi[(s2, a2)];
                    gamma_fin[idx] = big_phi[(s1, a2)] * big_psi[(s2, a1)];
                }
            }
        }
    }
    Ok(PurifiedPair::from_vectors(gamma_in, gamma_fin, vec![d; 4]))
}

/// Auxiliary extension of a linear functional given by vector pairs
/// (ψ_i, ψ'_i), λ(A) = Σ_i ⟨ψ'_i|A|ψ_i⟩.
#[derive(Debug, Clone)]
pub struct AvExtension {
    /// Normalized extended pre/post vectors on H ⊗ H_aux, registers [d, N].
    pub pair: PurifiedPair,
    /// The original functional λ on H.
    pub functional: TwoTimeVector,
    /// The extended functional Λ on H ⊗ H_aux built from the raw
    /// (unnormalized) vectors, so that λ(A) = Λ(A ⊗ I_aux) exactly.
    pub extended: TwoTimeVector,
    /// The normalized product two-time state on (H ⊗ H_aux)⊗², when defined;
    /// `None` exactly when λ(I) = 0, making the ratio identities undefined.
    pub state: Option<TwoTimeState>,
}

/// Extend a functional to a plain pre/post-selection with an N-dimensional
/// auxiliary: |Ψ_in⟩ = Σ_i ψ_i ⊗ |i⟩ and |Ψ_fin⟩ = Σ_i ψ'_i ⊗ |i⟩.
pub fn av_extension(terms: &[(CVector, CVector)]) -> Result<AvExtension> {
    let (first, _) = terms.first().ok_or(Error::Empty {
        what: "extension terms",
    })?;
    let d = first.len();
    let n = terms.len();
    let mut raw_in = CVector::zeros(d * n);
    let mut raw_fin = CVector::zeros(d * n);
    for (i, (psi, psi_p)) in terms.iter().enumerate() {
        if psi.len() != d || psi_p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: psi.len().min(psi_p.len()),
            });
        }
        for s in 0..d {
            raw_in[s * n + i] = psi[s];
            raw_fin[s * n + i] = psi_p[s];
        }
    }
    let (norm_in, norm_fin) = (raw_in.norm(), raw_fin.norm());
    if norm_in <= OVERLAP_TOL || norm_fin <= OVERLAP_TOL {
        return Err(Error::ZeroNorm {
            what: "extended pre/post vector",
        });
    }

    let functional = TwoTimeVector::from_pairs(terms)?;
    let extended = TwoTimeVector::from_pre_post(&raw_in, &raw_fin)?;

    let pair = PurifiedPair::from_vectors(
        raw_in.unscale(norm_in),
        raw_fin.unscale(norm_fin),
        vec![d, n],
    );

    let proj_in = qmath::projector(&pair.psi_in);
    let proj_fin_t = qmath::projector(&pair.psi_fin).transpose();
    let joint = DensityMatrix::bipartite(qmath::kron(&proj_in, &proj_fin_t), d * n, d * n)?;
    let state = match twotime::normalized_from_density(&joint) {
        Ok(s) => Some(s),
        Err(Error::ZeroSwapOverlap { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(AvExtension {
        pair,
        functional,
        extended,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{double_weak_value, pure_weak_value, weak_value};
    use crate::qmath::{identity, ket_one, ket_plus, ket_zero, kron, pauli_x, pauli_z};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pure(v: &CVector) -> DensityMatrix {
        DensityMatrix::from_pure(v).unwrap()
    }

    fn mixed_qubit() -> DensityMatrix {
        // 0.7|+><+| + 0.3|1><1|
        let m = qmath::projector(&ket_plus()).scale(0.7) + qmath::projector(&ket_one()).scale(0.3);
        DensityMatrix::new(m).unwrap()
    }

    fn observable_on_system(a: &CMatrix, d: usize) -> CMatrix {
        kron(a, &identity(d * d * d))
    }

    #[test]
    fn vaidman_pure_inputs_have_overlap_half() {
        // Tr[rho²]/d = 1/2 for a pure qubit state
        let rho = pure(&ket_zero());
        let pair = vaidman_purification(&rho, &rho).unwrap();
        assert!((pair.overlap - 0.5).abs() < 1e-12);
        assert!((pair.psi_in.norm() - 1.0).abs() < 1e-12);
        assert!((pair.psi_fin.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vaidman_maximally_mixed_overlap_quarter() {
        let rho = DensityMatrix::new(identity(2).scale(0.5)).unwrap();
        let pair = vaidman_purification(&rho, &rho).unwrap();
        assert!((pair.overlap - 0.25).abs() < 1e-12);
    }

    #[test]
    fn vaidman_identity_reproduces_weak_value() {
        let rho_in = mixed_qubit();
        let rho_fin =
            DensityMatrix::new(qmath::projector(&ket_zero()).scale(0.6) + identity(2).scale(0.2))
                .unwrap();
        let pair = vaidman_purification(&rho_in, &rho_fin).unwrap();
        for a in [pauli_z(), pauli_x()] {
            let lifted = observable_on_system(&a, 2);
            let purified = pure_weak_value(&lifted, &pair.psi_in, &pair.psi_fin).unwrap();
            let direct = weak_value(&a, &rho_in, &rho_fin).unwrap().value;
            assert!((purified - direct).norm() < 1e-10, "observable {a}");
        }
        // overlap closed form
        let mu = crate::analytics::overlap(&rho_in, &rho_fin);
        assert!((pair.overlap - mu / 2.0).abs() < 1e-12);
    }

    #[test]
    fn vaidman_reduced_state_is_rho_in() {
        let rho_in = mixed_qubit();
        let rho_fin = pure(&ket_zero());
        let pair = vaidman_purification(&rho_in, &rho_fin).unwrap();
        // trace out A1 A2 A3 from |Ψ_in⟩⟨Ψ_in|
        let d = 2;
        let aux = d * d * d;
        let mut reduced = CMatrix::zeros(d, d);
        for s in 0..d {
            for t in 0..d {
                let mut sum = c(0.0, 0.0);
                for a in 0..aux {
                    sum += pair.psi_in[s * aux + a] * pair.psi_in[t * aux + a].conj();
                }
                reduced[(s, t)] = sum;
            }
        }
        assert!(qmath::approx_eq(&reduced, rho_in.matrix(), 1e-12));
    }

    #[test]
    fn vaidman_rejects_orthogonal_pairs() {
        let a = pure(&ket_zero());
        let b = pure(&ket_one());
        assert!(matches!(
            vaidman_purification(&a, &b),
            Err(Error::OrthogonalPrePostSelection { .. })
        ));
    }

    #[test]
    fn double_purification_overlap_is_squared() {
        // (Tr[rho_in rho_fin])² = (1/2)² for two maximally mixed qubits
        let rho = DensityMatrix::new(identity(2).scale(0.5)).unwrap();
        let pair = double_purification(&rho, &rho).unwrap();
        assert!((pair.overlap - 0.25).abs() < 1e-12);

        let rho_in = mixed_qubit();
        let rho_fin = pure(&ket_zero());
        let pair = double_purification(&rho_in, &rho_fin).unwrap();
        let mu = crate::analytics::overlap(&rho_in, &rho_fin);
        assert!((pair.overlap - mu * mu).abs() < 1e-12);
    }

    #[test]
    fn double_purification_identity_reproduces_double_weak_value() {
        let rho_in = mixed_qubit();
        let rho_fin =
            DensityMatrix::new(qmath::projector(&ket_zero()).scale(0.6) + identity(2).scale(0.2))
                .unwrap();
        let pair = double_purification(&rho_in, &rho_fin).unwrap();
        let d = 2;
        for (a, b) in [(pauli_z(), pauli_z()), (pauli_x(), pauli_z())] {
            let lifted = kron(&kron(&a, &b), &identity(d * d));
            let purified = pure_weak_value(&lifted, &pair.psi_in, &pair.psi_fin).unwrap();
            let direct = double_weak_value(&a, &b, &rho_in, &rho_fin).unwrap();
            assert!((purified - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn double_purification_at_identity_b_gives_weak_value() {
        let rho_in = mixed_qubit();
        let rho_fin = pure(&ket_plus());
        let pair = double_purification(&rho_in, &rho_fin).unwrap();
        let lifted = kron(&kron(&pauli_z(), &identity(2)), &identity(4));
        let purified = pure_weak_value(&lifted, &pair.psi_in, &pair.psi_fin).unwrap();
        let direct = weak_value(&pauli_z(), &rho_in, &rho_fin).unwrap().value;
        assert!((purified - direct).norm() < 1e-10);
    }

    #[test]
    fn extension_with_single_term_is_plain_selection() {
        let ext = av_extension(&[(ket_plus(), ket_zero())]).unwrap();
        assert_eq!(ext.pair.register_dims, vec![2, 1]);
        let a = pauli_z();
        let lhs = ext.functional.eval(&a).unwrap();
        let rhs = ext.extended.eval(&kron(&a, &identity(1))).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
        // reduces to the pure-state sandwich <ψ'|A|ψ>
        assert!((lhs - ket_zero().dotc(&(&a * ket_plus()))).norm() < 1e-13);
    }

    #[test]
    fn extension_matches_functional_on_fixed_pairs() {
        // ψ = (|0>, |1>), ψ' = (|0>, |0>): λ(A) = <0|A|0> + <0|A|1>
        let terms = vec![(ket_zero(), ket_zero()), (ket_one(), ket_zero())];
        let ext = av_extension(&terms).unwrap();
        let a = crate::qmath::cmat(
            2,
            2,
            &[c(0.3, 0.1), c(-1.0, 0.4), c(0.9, 0.0), c(0.2, -0.5)],
        );
        let expected = a[(0, 0)] + a[(0, 1)];
        assert!((ext.functional.eval(&a).unwrap() - expected).norm() < 1e-13);
        let lifted = kron(&a, &identity(2));
        assert!((ext.extended.eval(&lifted).unwrap() - expected).norm() < 1e-13);
    }

    #[test]
    fn extension_ratio_identities() {
        let terms = vec![
            (ket_zero(), qmath::cvec(&[c(0.8, 0.1), c(0.2, -0.4)])),
            (ket_plus(), qmath::cvec(&[c(0.1, 0.0), c(1.1, 0.3)])),
        ];
        let ext = av_extension(&terms).unwrap();
        let state = ext.state.as_ref().expect("nonzero normalization");
        let (d, n) = (2, 2);
        let a = pauli_z();
        let b = pauli_x();
        let a_ext = kron(&a, &identity(n));
        let b_ext = kron(&b, &identity(n));
        let id_ext = identity(d * n);

        // λ(A)/λ(I) equals the state expectation against the identity
        let lam_a = ext.functional.eval(&a).unwrap();
        let lam_i = ext.functional.eval(&identity(d)).unwrap();
        let lhs = lam_a / lam_i;
        let rhs = state.eval(&a_ext, &id_ext).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);

        // E_λ(A,B)/E_λ(I,I) equals the two-observable expectation
        let e_ab = lam_a * ext.functional.adjoint().eval(&b).unwrap();
        let e_ii = lam_i * ext.functional.adjoint().eval(&identity(d)).unwrap();
        let lhs2 = e_ab / e_ii;
        let rhs2 = state.eval(&a_ext, &b_ext).unwrap();
        assert!((lhs2 - rhs2).norm() < 1e-10);
    }

    #[test]
    fn extension_with_vanishing_normalization_has_no_state() {
        // <ψ'|ψ> sums to zero: λ(I) = 0
        let terms = vec![(ket_zero(), ket_one()), (ket_one(), ket_zero())];
        let ext = av_extension(&terms).unwrap();
        assert!(ext.state.is_none());
        assert!(ext.functional.eval(&identity(2)).unwrap().norm() < 1e-13);
        // absolute values are still available
        let lam_x = ext.functional.eval(&pauli_x()).unwrap();
        assert!((lam_x - c(2.0, 0.0)).norm() < 1e-13);
    }
}
