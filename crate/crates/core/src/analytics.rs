//! Exact, non-statistical evaluation of weak values, the weak-value measure,
//! and double weak values. Every Monte Carlo estimator in this crate is
//! checked against this layer.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::{CMatrix, CVector};
use crate::qobjects::{DensityMatrix, Povm, UnbiasedObservable};

/// Pre/post-selected pairs with |Tr[rho_in rho_fin]| at or below this
/// threshold are treated as orthogonal.
pub const OVERLAP_TOL: f64 = 1e-12;

/// A weak value together with the overlap that normalizes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValue {
    pub value: Complex64,
    /// Tr[rho_in rho_fin], always positive when the value is defined.
    pub overlap: f64,
    /// False when the observable was not Hermitian; the value is still the
    /// same trace ratio, evaluated for a general linear operator.
    pub hermitian_observable: bool,
}

/// The complex measure q(j) = Tr[P_j rho_in rho_fin] over POVM outcomes,
/// normalized as Σ_j q_j = Tr[rho_in rho_fin].
#[derive(Debug, Clone, PartialEq)]
pub struct WvMeasure {
    pub values: Vec<Complex64>,
    pub normalization: Complex64,
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// Overlap Tr[rho_in rho_fin]; real and nonnegative for density matrices.
pub fn overlap(rho_in: &DensityMatrix, rho_fin: &DensityMatrix) -> f64 {
    (rho_in.matrix() * rho_fin.matrix()).trace().re
}

/// Weak value W(A) = Tr[rho_fin A rho_in] / Tr[rho_fin rho_in].
pub fn weak_value(
    a: &CMatrix,
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
) -> Result<WeakValue> {
    check_same_dim(rho_in.dim(), rho_fin.dim())?;
    check_same_dim(rho_in.dim(), a.nrows())?;
    let mu = overlap(rho_in, rho_fin);
    if mu.abs() <= OVERLAP_TOL {
        return Err(Error::OrthogonalPrePostSelection { overlap: mu.abs() });
    }
    let numerator = (rho_fin.matrix() * a * rho_in.matrix()).trace();
    Ok(WeakValue {
        value: numerator / mu,
        overlap: mu,
        hermitian_observable: crate::qmath::is_hermitian(a, crate::qmath::DEFAULT_TOL),
    })
}

/// Pure-state weak value ⟨ψ_fin|A|ψ_in⟩ / ⟨ψ_fin|ψ_in⟩ evaluated directly on
/// vectors; the states need not be normalized.
pub fn pure_weak_value(a: &CMatrix, psi_in: &CVector, psi_fin: &CVector) -> Result<Complex64> {
    check_same_dim(psi_in.len(), psi_fin.len())?;
    check_same_dim(psi_in.len(), a.nrows())?;
    let denom = psi_fin.dotc(psi_in);
    if denom.norm() <= OVERLAP_TOL {
        return Err(Error::OrthogonalPrePostSelection {
            overlap: denom.norm(),
        });
    }
    Ok(psi_fin.dotc(&(a * psi_in)) / denom)
}

/// The weak-value measure q(j) = Tr[P_j rho_in rho_fin].
///
/// Orthogonal state pairs are allowed here; the normalization may be zero.
pub fn wv_measure(
    povm: &Povm,
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
) -> Result<WvMeasure> {
    check_same_dim(rho_in.dim(), rho_fin.dim())?;
    check_same_dim(rho_in.dim(), povm.dim())?;
    let product = rho_in.matrix() * rho_fin.matrix();
    let values: Vec<Complex64> = povm
        .elements()
        .iter()
        .map(|p| (p * &product).trace())
        .collect();
    let normalization = values.iter().sum();
    Ok(WvMeasure {
        values,
        normalization,
    })
}

/// Weak value as the ratio of measure expectations, E_q(X)/E_q(Y) with
/// X: j ↦ x_j and Y ≡ 1.
pub fn wv_from_measure(obs: &UnbiasedObservable, q: &WvMeasure) -> Result<WeakValue> {
    if obs.len() != q.values.len() {
        return Err(Error::LengthMismatch {
            expected: obs.len(),
            found: q.values.len(),
        });
    }
    if q.normalization.norm() <= OVERLAP_TOL {
        return Err(Error::OrthogonalPrePostSelection {
            overlap: q.normalization.norm(),
        });
    }
    let ex: Complex64 = obs
        .values()
        .iter()
        .zip(&q.values)
        .map(|(x, qj)| qj * *x)
        .sum();
    Ok(WeakValue {
        value: ex / q.normalization,
        overlap: q.normalization.re,
        hermitian_observable: true,
    })
}

/// Double weak value W₂(A, B) = Tr[A rho_in B rho_fin] / Tr[rho_in rho_fin].
///
/// Setting B = I recovers the ordinary weak value of A.
pub fn double_weak_value(
    a: &CMatrix,
    b: &CMatrix,
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
) -> Result<Complex64> {
    check_same_dim(rho_in.dim(), rho_fin.dim())?;
    check_same_dim(rho_in.dim(), a.nrows())?;
    check_same_dim(rho_in.dim(), b.nrows())?;
    let mu = overlap(rho_in, rho_fin);
    if mu.abs() <= OVERLAP_TOL {
        return Err(Error::OrthogonalPrePostSelection { overlap: mu.abs() });
    }
    Ok((a * rho_in.matrix() * b * rho_fin.matrix()).trace() / mu)
}

/// One term of the correlation decomposition of a double weak value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwvTerm {
    /// Eigenvector indices into the decompositions of rho_in and rho_fin.
    pub m: usize,
    pub n: usize,
    pub weight: f64,
    /// W(A|ψ_m, ψ'_n) · W(B|ψ'_n, ψ_m); `None` marks pairs with
    /// ⟨ψ_m|ψ'_n⟩ = 0, whose weak values are individually undefined while
    /// their weight vanishes.
    pub term: Option<Complex64>,
}

/// Correlation decomposition W₂ = Σ_{m,n} p(m,n) W(A|ψ_m,ψ'_n) W(B|ψ'_n,ψ_m)
/// over the eigenbases of the two states, with weights
/// p(m,n) ∝ r_m r'_n |⟨ψ_m|ψ'_n⟩|².
#[derive(Debug, Clone, PartialEq)]
pub struct DwvDecomposition {
    pub terms: Vec<DwvTerm>,
}

impl DwvDecomposition {
    /// Σ p(m,n) · term(m,n), skipping weight-zero undefined pairs.
    pub fn weighted_sum(&self) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|t| t.term.map(|v| v * t.weight))
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }
}

/// Decompose a double weak value into weak-value correlations over the
/// eigenbases of `rho_in` and `rho_fin`.
pub fn dwv_correlation_decomposition(
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
    a: &CMatrix,
    b: &CMatrix,
) -> Result<DwvDecomposition> {
    check_same_dim(rho_in.dim(), rho_fin.dim())?;
    let mu = overlap(rho_in, rho_fin);
    if mu.abs() <= OVERLAP_TOL {
        return Err(Error::OrthogonalPrePostSelection { overlap: mu.abs() });
    }
    let (r, psi) = rho_in.eigen_clipped()?;
    let (rp, psi_p) = rho_fin.eigen_clipped()?;
    let d = rho_in.dim();

    // p(m,n) = r_m r'_n |<ψ_m|ψ'_n>|² / Σ_ij r_i r'_j |<ψ_i|ψ'_j>|²; the
    // denominator equals Tr[rho_in rho_fin]
    let mut terms = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            let ip = psi[m].dotc(&psi_p[n]);
            let weight = r[m] * rp[n] * ip.norm_sqr() / mu;
            let term = if ip.norm() <= OVERLAP_TOL {
                None
            } else {
                let wa = psi_p[n].dotc(&(a * &psi[m])) / ip.conj();
                let wb = psi[m].dotc(&(b * &psi_p[n])) / ip;
                Some(wa * wb)
            };
            terms.push(DwvTerm { m, n, weight, term });
        }
    }
    Ok(DwvDecomposition { terms })
}
