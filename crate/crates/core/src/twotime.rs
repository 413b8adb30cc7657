//! The two-time state calculus.
//!
//! A two-time vector is a linear functional λ on observables, represented by
//! the unique matrix L with λ(A) = Tr[L·A]; the prototype is
//! L = |ψ_in⟩⟨ψ_fin|, for which λ(A) = ⟨ψ_fin|A|ψ_in⟩. A two-time density
//! matrix is a bilinear functional ω(A, B) obeying the positivity condition
//! ω(A, A†) ≥ 0; every such functional is represented by a unique positive
//! operator P on H ⊗ H through
//!
//! ```text
//! ω(A, B) = Tr[ P^{T2} · SWAP · (A ⊗ B) ] = ⟨⟨A†| P |B⟩⟩ ,
//! ```
//!
//! where T2 is partial transposition of the second factor and |·⟩⟩ the
//! double-ket vectorization. Normalized two-time states (ω(I, I) = 1)
//! correspond exactly to bipartite density matrices ρ with
//! ⟨⟨I|ρ|I⟩⟩ = Tr[ρ^{T2}·SWAP] > 0, via the fractional map [`normalized_from_density`].
//!
//! The controlled-SWAP circuit natively estimates the transpose-free ratios
//! of [`pseudo_expectation`]; the two coincide exactly on states invariant
//! under partial transposition, and the PPT check [`is_ppt`] classifies which
//! density matrices can serve as two-time states when access to ρ^{T2} is
//! available.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{self, CMatrix, CVector};
use crate::qobjects::{DensityMatrix, POSITIVITY_TOL};
use crate::serial::MatrixData;

/// SWAP overlaps at or below this threshold make the normalizing ratio
/// undefined.
pub const SWAP_OVERLAP_TOL: f64 = 1e-12;

/// A linear functional λ(A) = Tr[L·A] on observables.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTimeVector {
    l: CMatrix,
}

impl TwoTimeVector {
    pub fn new(l: CMatrix) -> Result<Self> {
        if l.nrows() != l.ncols() {
            return Err(Error::NotSquare {
                rows: l.nrows(),
                cols: l.ncols(),
            });
        }
        Ok(TwoTimeVector { l })
    }

    /// The pre/post-selected prototype L = |ψ_in⟩⟨ψ_fin|, so that
    /// λ(A) = ⟨ψ_fin|A|ψ_in⟩.
    pub fn from_pre_post(psi_in: &CVector, psi_fin: &CVector) -> Result<Self> {
        if psi_in.len() != psi_fin.len() {
            return Err(Error::DimensionMismatch {
                expected: psi_in.len(),
                found: psi_fin.len(),
            });
        }
        Ok(TwoTimeVector {
            l: qmath::outer(psi_in, psi_fin),
        })
    }

    /// General linear combination λ(A) = Σ_i ⟨ψ'_i|A|ψ_i⟩, i.e.
    /// L = Σ_i |ψ_i⟩⟨ψ'_i|.
    pub fn from_pairs(terms: &[(CVector, CVector)]) -> Result<Self> {
        let (first, _) = terms.first().ok_or(Error::Empty {
            what: "two-time vector terms",
        })?;
        let d = first.len();
        let mut l = CMatrix::zeros(d, d);
        for (psi, psi_p) in terms {
            if psi.len() != d || psi_p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: psi.len().min(psi_p.len()),
                });
            }
            l += qmath::outer(psi, psi_p);
        }
        Ok(TwoTimeVector { l })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// λ(A) = Tr[L·A].
    pub fn eval(&self, a: &CMatrix) -> Result<Complex64> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.nrows(),
            });
        }
        Ok((&self.l * a).trace())
    }

    /// The adjoint functional λ†(A) = conj(λ(A†)), represented by L†.
    pub fn adjoint(&self) -> TwoTimeVector {
        TwoTimeVector {
            l: self.l.adjoint(),
        }
    }

    /// The pure two-time density matrix E_λ(A, B) = λ(A)·λ†(B), whose
    /// operator representation is the rank-one projector onto |L⟩⟩.
    pub fn pure_state(&self) -> TwoTimeState {
        let v = qmath::double_ket(&self.l).expect("L is square");
        let p = qmath::outer(&v, &v);
        let normalized = normalization_of(&p)
            .map(|n| (n - 1.0).abs() <= 1e-10)
            .unwrap_or(false);
        TwoTimeState {
            p,
            d: self.dim(),
            normalized,
        }
    }
}

/// A two-time density matrix stored through its unique positive operator P.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTimeState {
    p: CMatrix,
    d: usize,
    normalized: bool,
}

fn normalization_of(p: &CMatrix) -> Result<f64> {
    let n = p.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: n,
        });
    }
    // ω(I, I) = Tr[P^{T2}·SWAP] = ⟨⟨I|P|I⟩⟩
    let id = qmath::max_entangled_unnorm(d);
    Ok(id.dotc(&(p * &id)).re)
}

impl TwoTimeState {
    /// Validate positivity of `p` (on H ⊗ H) and wrap it.
    pub fn new(p: CMatrix) -> Result<Self> {
        let n = p.nrows();
        if p.ncols() != n {
            return Err(Error::NotSquare {
                rows: p.nrows(),
                cols: p.ncols(),
            });
        }
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: n,
            });
        }
        let dev = qmath::hermiticity_deviation(&p);
        if dev > qmath::DEFAULT_TOL {
            return Err(Error::NotHermitian { max_dev: dev });
        }
        let min = qmath::min_eigenvalue(&p)?;
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let normalized = (normalization_of(&p)? - 1.0).abs() <= 1e-10;
        Ok(TwoTimeState { p, d, normalized })
    }

    pub fn operator(&self) -> &CMatrix {
        &self.p
    }

    /// Factor dimension d of the underlying H ⊗ H.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Whether ω(I, I) = 1 within tolerance.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// ω(I, I).
    pub fn normalization(&self) -> f64 {
        normalization_of(&self.p).expect("operator dimension is a perfect square")
    }

    /// ω(A, B) = Tr[P^{T2}·SWAP·(A ⊗ B)].
    pub fn eval(&self, a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
        if a.nrows() != self.d || b.nrows() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: a.nrows().min(b.nrows()),
            });
        }
        let pt = qmath::partial_transpose_2(&self.p, self.d, self.d)?;
        let swap = qmath::swap_operator(self.d);
        Ok((pt * swap * qmath::kron(a, b)).trace())
    }
}

impl Serialize for TwoTimeState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            p: MatrixData,
            normalized: bool,
        }
        Repr {
            p: MatrixData::from_matrix(&self.p),
            normalized: self.normalized,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoTimeState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            p: MatrixData,
            #[allow(dead_code)]
            normalized: bool,
        }
        let repr = Repr::deserialize(d)?;
        let mat = repr.p.to_matrix().map_err(serde::de::Error::custom)?;
        TwoTimeState::new(mat).map_err(serde::de::Error::custom)
    }
}

/// Table of functional values ω(E_ij, E_kl) on all pairs of matrix units.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalTable {
    d: usize,
    values: Vec<Complex64>,
}

impl FunctionalTable {
    fn idx(d: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * d + j) * d + k) * d + l
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize, usize, usize) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(d * d * d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        values.push(f(i, j, k, l));
                    }
                }
            }
        }
        FunctionalTable { d, values }
    }

    /// Tabulate a state by evaluating it on matrix units.
    pub fn from_state(state: &TwoTimeState) -> Self {
        Self::from_operator(state.operator()).expect("state operator has square dimension")
    }

    /// Tabulate the functional of an arbitrary (not necessarily positive)
    /// operator through the trace formula.
    pub fn from_operator(p: &CMatrix) -> Result<Self> {
        let n = p.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || p.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: n,
            });
        }
        let pt = qmath::partial_transpose_2(p, d, d)?;
        let core = pt * qmath::swap_operator(d);
        Ok(Self::from_fn(d, |i, j, k, l| {
            let eij = unit_matrix(d, i, j);
            let ekl = unit_matrix(d, k, l);
            (&core * qmath::kron(&eij, &ekl)).trace()
        }))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// ω(E_ij, E_kl).
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.values[Self::idx(self.d, i, j, k, l)]
    }

    /// Bilinear extension ω(A, B) = Σ a_ij b_kl ω(E_ij, E_kl).
    pub fn eval(&self, a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
        let d = self.d;
        if a.nrows() != d || b.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a.nrows().min(b.nrows()),
            });
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                let aij = a[(i, j)];
                if aij == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..d {
                    for l in 0..d {
                        sum += aij * b[(k, l)] * self.get(i, j, k, l);
                    }
                }
            }
        }
        Ok(sum)
    }
}

fn unit_matrix(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// Reconstruct the unique representing operator from a functional table:
/// P[(a,b), (c,l)] = ω(E_ba, E_cl), from ω(A, B) = ⟨⟨A†|P|B⟩⟩.
pub fn reconstruct_operator(table: &FunctionalTable) -> CMatrix {
    let d = table.dim();
    CMatrix::from_fn(d * d, d * d, |row, col| {
        let (a, b) = (row / d, row % d);
        let (c, l) = (col / d, col % d);
        table.get(b, a, c, l)
    })
}

/// Recover the unique two-time state reproducing a functional table.
///
/// Fails with `NotATwoTimeState` when the reconstructed operator is not
/// positive semidefinite — i.e. when the table violates ω(A, A†) ≥ 0.
pub fn state_from_functional(table: &FunctionalTable) -> Result<TwoTimeState> {
    let p = reconstruct_operator(table);
    let dev = qmath::hermiticity_deviation(&p);
    let min = qmath::min_eigenvalue(&p)?;
    if dev > 1e-8 || min < -POSITIVITY_TOL {
        return Err(Error::NotATwoTimeState {
            min_eigenvalue: min,
        });
    }
    TwoTimeState::new(p)
}

/// For a table with indefinite representing operator, produce a witness
/// observable A with ω(A, A†) < 0, read off the most negative eigenvector
/// through the double-ket correspondence.
pub fn negativity_witness(table: &FunctionalTable) -> Option<CMatrix> {
    let p = reconstruct_operator(table);
    let eig = qmath::hermitian_eigen(&p).ok()?;
    if eig.min_value() >= 0.0 {
        return None;
    }
    // ω(A, A†) = ⟨⟨A†|P|A†⟩⟩: take A† as the unvectorized negative eigenvector
    let a_dagger = qmath::double_ket_inverse(&eig.eigenvector(0)).ok()?;
    Some(a_dagger.adjoint())
}

/// SWAP overlap Tr[ρ^{T2}·SWAP] of a state on H ⊗ H; equals ⟨⟨I|ρ|I⟩⟩ and is
/// therefore nonnegative.
pub fn swap_overlap(rho: &DensityMatrix) -> Result<f64> {
    let d = rho.equal_bipartite_dim()?;
    let pt = qmath::partial_transpose_2(rho.matrix(), d, d)?;
    let value = (pt * qmath::swap_operator(d)).trace().re;
    debug_assert!({
        let id = qmath::max_entangled_unnorm(d);
        (id.dotc(&(rho.matrix() * &id)).re - value).abs() < 1e-9
    });
    Ok(value)
}

/// The normalized two-time state of a bipartite density matrix:
/// ω_ρ(A, B) = Tr[ρ^{T2}·SWAP·(A⊗B)] / Tr[ρ^{T2}·SWAP].
pub fn normalized_from_density(rho: &DensityMatrix) -> Result<TwoTimeState> {
    let overlap = swap_overlap(rho)?;
    if overlap <= SWAP_OVERLAP_TOL {
        return Err(Error::ZeroSwapOverlap { value: overlap });
    }
    let d = rho.equal_bipartite_dim()?;
    Ok(TwoTimeState {
        p: rho.matrix().unscale(overlap),
        d,
        normalized: true,
    })
}

/// PPT classification of a bipartite state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub ppt: bool,
    /// Smallest eigenvalue of ρ^{T2}.
    pub min_eigenvalue: f64,
}

/// Positivity of the partial transpose, with the witnessing eigenvalue.
pub fn is_ppt(rho: &DensityMatrix) -> Result<PptReport> {
    let d = rho.equal_bipartite_dim()?;
    let pt = qmath::partial_transpose_2(rho.matrix(), d, d)?;
    let min = qmath::min_eigenvalue(&pt)?;
    Ok(PptReport {
        ppt: min >= -POSITIVITY_TOL,
        min_eigenvalue: min,
    })
}

/// Transpose-free ratio natively estimated by the controlled-SWAP circuit:
/// ω̃_ρ(A, B) = Tr[ρ·SWAP·(A⊗B)] / Tr[ρ·SWAP].
///
/// Coincides with the two-time expectation of [`normalized_from_density`]
/// exactly when ρ is invariant under partial transposition.
pub fn pseudo_expectation(rho: &DensityMatrix, a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    pseudo_expectation_op(rho, &qmath::kron(a, b))
}

/// [`pseudo_expectation`] for an arbitrary joint observable O on H ⊗ H:
/// Tr[ρ·SWAP·O] / Tr[ρ·SWAP].
pub fn pseudo_expectation_op(rho: &DensityMatrix, op: &CMatrix) -> Result<Complex64> {
    let d = rho.equal_bipartite_dim()?;
    if op.nrows() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: op.nrows(),
        });
    }
    let swap = qmath::swap_operator(d);
    let denom = (rho.matrix() * &swap).trace().re;
    if denom.abs() <= SWAP_OVERLAP_TOL {
        return Err(Error::ZeroSwapOverlap { value: denom });
    }
    Ok((rho.matrix() * swap * op).trace() / denom)
}

/// The optimal universal transpose channel T(ρ) = (ρᵀ + I) / (d + 1), a
/// physical (completely positive, trace-preserving) approximation of the
/// transpose.
pub fn universal_transpose(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let mat = (rho.matrix().transpose() + qmath::identity(d)).unscale(d as f64 + 1.0);
    DensityMatrix::new(mat).expect("universal transpose output is a valid state")
}

/// Weights transporting a convex mixture of density matrices to the induced
/// convex mixture of two-time states:
/// q_i = p_i ⟨⟨I|ρ_i|I⟩⟩ / Σ_j p_j ⟨⟨I|ρ_j|I⟩⟩, so that
/// ω_{Σ p_i ρ_i} = Σ q_i ω_{ρ_i}.
pub fn convex_weight_transport(components: &[(f64, DensityMatrix)]) -> Result<Vec<f64>> {
    if components.is_empty() {
        return Err(Error::Empty {
            what: "mixture components",
        });
    }
    let total_p: f64 = components.iter().map(|(p, _)| p).sum();
    if (total_p - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidProbability {
            value: total_p,
            range: "sum to 1",
        });
    }
    let mut weights = Vec::with_capacity(components.len());
    let mut denom = 0.0;
    for (p, rho) in components {
        if *p < 0.0 {
            return Err(Error::InvalidProbability {
                value: *p,
                range: "[0, 1]",
            });
        }
        let w = p * swap_overlap(rho)?;
        weights.push(w);
        denom += w;
    }
    if denom <= SWAP_OVERLAP_TOL {
        return Err(Error::ZeroSwapOverlap { value: denom });
    }
    for w in weights.iter_mut() {
        *w /= denom;
    }
    Ok(weights)
}
