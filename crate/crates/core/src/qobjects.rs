//! Validated quantum objects: density matrices, POVMs, and unbiased
//! observable decompositions.
//!
//! An unbiased decomposition of an observable A is a POVM (P_j)_j together
//! with real values (x_j)_j satisfying A = Σ_j x_j P_j, so that the value
//! average under the outcome distribution of any state reproduces `Tr[Aρ]`.
//! The canonical example is a noisy measurement: P_j = (1−p) Q_j + p λ_j I
//! built from the spectral projectors Q_j of A, with rescaled values
//! x_j = (a_j − p ā)/(1−p).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::{self, CMatrix, CVector, DEFAULT_TOL};

/// Smallest eigenvalue accepted when validating positivity. Eigensolver noise
/// on legitimate states must not cause rejections.
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Eigenvalues closer than this are merged into one spectral outcome.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// A positive semidefinite, unit-trace operator, optionally tagged with the
/// tensor-factor dimensions of a multipartite system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validate and wrap a density matrix on a single system.
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tol(mat, DEFAULT_TOL)
    }

    /// Like [`DensityMatrix::new`] with an explicit validation tolerance for
    /// the Hermiticity and trace checks.
    pub fn with_tol(mat: CMatrix, tol: f64) -> Result<Self> {
        Self::validate(&mat, tol)?;
        let d = mat.nrows();
        Ok(DensityMatrix { mat, dims: vec![d] })
    }

    /// Validate and wrap a bipartite density matrix on H_A ⊗ H_B.
    pub fn bipartite(mat: CMatrix, da: usize, db: usize) -> Result<Self> {
        Self::bipartite_with_tol(mat, da, db, DEFAULT_TOL)
    }

    pub fn bipartite_with_tol(mat: CMatrix, da: usize, db: usize, tol: f64) -> Result<Self> {
        if mat.nrows() != da * db {
            return Err(Error::DimensionMismatch {
                expected: da * db,
                found: mat.nrows(),
            });
        }
        Self::validate(&mat, tol)?;
        Ok(DensityMatrix {
            mat,
            dims: vec![da, db],
        })
    }

    /// Pure state |v⟩⟨v| / ⟨v|v⟩.
    pub fn from_pure(v: &CVector) -> Result<Self> {
        if v.norm_squared() <= 0.0 {
            return Err(Error::ZeroNorm {
                what: "state vector",
            });
        }
        let d = v.len();
        Ok(DensityMatrix {
            mat: qmath::projector(v),
            dims: vec![d],
        })
    }

    fn validate(mat: &CMatrix, tol: f64) -> Result<()> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let dev = qmath::hermiticity_deviation(mat);
        if dev > tol {
            return Err(Error::NotHermitian { max_dev: dev });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.max(1e-12) || tr.im.abs() > tol.max(1e-12) {
            return Err(Error::TraceNotOne { trace: tr.re });
        }
        let min = qmath::min_eigenvalue(mat)?;
        if min < -POSITIVITY_TOL.max(tol) {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Tensor-factor dimensions; `[d]` for a single system, `[dA, dB]` for a
    /// bipartite one.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Factor dimension of a state on H ⊗ H.
    ///
    /// Accepts states tagged `[d, d]` as well as untagged states whose total
    /// dimension is a perfect square.
    pub fn equal_bipartite_dim(&self) -> Result<usize> {
        if self.dims.len() == 2 {
            if self.dims[0] == self.dims[1] {
                return Ok(self.dims[0]);
            }
            return Err(Error::DimensionMismatch {
                expected: self.dims[0],
                found: self.dims[1],
            });
        }
        let n = self.dim();
        let d = (n as f64).sqrt().round() as usize;
        if d * d == n {
            Ok(d)
        } else {
            Err(Error::DimensionMismatch {
                expected: d * d,
                found: n,
            })
        }
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Eigendecomposition with eigenvalues clipped to be nonnegative.
    pub fn eigen_clipped(&self) -> Result<(Vec<f64>, Vec<CVector>)> {
        let eig = qmath::hermitian_eigen(&self.mat)?;
        let values = eig.values.iter().map(|&v| v.max(0.0)).collect();
        let vectors = (0..self.dim()).map(|i| eig.eigenvector(i)).collect();
        Ok((values, vectors))
    }
}

/// A positive operator-valued measure: positive elements summing to identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        Self::with_tol(elements, DEFAULT_TOL)
    }

    pub fn with_tol(elements: Vec<CMatrix>, tol: f64) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Empty {
                what: "POVM element list",
            });
        }
        let d = elements[0].nrows();
        let mut sum = CMatrix::zeros(d, d);
        for el in &elements {
            if el.nrows() != d || el.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: el.nrows(),
                });
            }
            let dev = qmath::hermiticity_deviation(el);
            if dev > tol {
                return Err(Error::NotHermitian { max_dev: dev });
            }
            let min = qmath::min_eigenvalue(el)?;
            if min < -POSITIVITY_TOL.max(tol) {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
            sum += el;
        }
        let dev = qmath::max_abs_diff(&sum, &qmath::identity(d));
        if dev > tol {
            return Err(Error::PovmIncomplete { max_dev: dev });
        }
        Ok(Povm { elements })
    }

    /// The trivial single-outcome POVM {I}.
    pub fn trivial(d: usize) -> Self {
        Povm {
            elements: vec![qmath::identity(d)],
        }
    }

    /// The computational-basis projective POVM {|i⟩⟨i|}.
    pub fn computational(d: usize) -> Self {
        let elements = (0..d)
            .map(|i| {
                let e = qmath::basis_state(d, i);
                qmath::outer(&e, &e)
            })
            .collect();
        Povm { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, j: usize) -> &CMatrix {
        &self.elements[j]
    }
}

/// A POVM with outcome values forming an unbiased decomposition of an
/// observable.
#[derive(Debug, Clone, PartialEq)]
pub struct UnbiasedObservable {
    povm: Povm,
    values: Vec<f64>,
    observable: CMatrix,
    x_max: f64,
}

impl UnbiasedObservable {
    /// Build the observable A := Σ_j x_j P_j from a POVM and values. The
    /// unbiasedness invariant holds by construction.
    pub fn new(povm: Povm, values: Vec<f64>) -> Result<Self> {
        if values.len() != povm.len() {
            return Err(Error::LengthMismatch {
                expected: povm.len(),
                found: values.len(),
            });
        }
        let d = povm.dim();
        let mut observable = CMatrix::zeros(d, d);
        for (x, p) in values.iter().zip(povm.elements()) {
            observable += p.scale(*x);
        }
        let x_max = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Ok(UnbiasedObservable {
            povm,
            values,
            observable,
            x_max,
        })
    }

    /// Wrap an existing observable, checking A = Σ_j x_j P_j within `tol`.
    pub fn for_observable(a: CMatrix, povm: Povm, values: Vec<f64>, tol: f64) -> Result<Self> {
        let built = Self::new(povm, values)?;
        let dev = qmath::max_abs_diff(&a, &built.observable);
        if dev > tol {
            return Err(Error::NotUnbiased { max_dev: dev });
        }
        Ok(UnbiasedObservable {
            observable: a,
            ..built
        })
    }

    /// Ideal projective measurement of a Hermitian observable, one outcome
    /// per distinct eigenvalue.
    pub fn projective(a: &CMatrix) -> Result<Self> {
        noisy_measurement(a, 0.0, None)
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn observable(&self) -> &CMatrix {
        &self.observable
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dim(&self) -> usize {
        self.povm.dim()
    }

    pub fn len(&self) -> usize {
        self.povm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.povm.is_empty()
    }

    /// Joint measurement of two observables on a pair of systems: POVM
    /// {P_j ⊗ Q_k} with values x_j·y_k, unbiased for A ⊗ B. Outcomes are
    /// flattened row-major with the second index fastest.
    pub fn product(a: &UnbiasedObservable, b: &UnbiasedObservable) -> Self {
        let mut elements = Vec::with_capacity(a.len() * b.len());
        let mut values = Vec::with_capacity(a.len() * b.len());
        for (xa, pa) in a.values.iter().zip(a.povm.elements()) {
            for (xb, pb) in b.values.iter().zip(b.povm.elements()) {
                elements.push(qmath::kron(pa, pb));
                values.push(xa * xb);
            }
        }
        let observable = qmath::kron(&a.observable, &b.observable);
        let x_max = a.x_max * b.x_max;
        UnbiasedObservable {
            povm: Povm { elements },
            values,
            observable,
            x_max,
        }
    }
}

/// Spectral decomposition of a Hermitian matrix into distinct eigenvalues and
/// orthogonal projectors, A = Σ_j a_j Q_j with Σ_j Q_j = I.
///
/// Eigenvalues within [`DEGENERACY_TOL`] are merged into a single outcome;
/// outcomes are ordered by decreasing eigenvalue.
pub fn spectral_decompose(a: &CMatrix) -> Result<Vec<(f64, CMatrix)>> {
    let dev = qmath::hermiticity_deviation(a);
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if dev > DEFAULT_TOL {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    let eig = qmath::hermitian_eigen(a)?;
    let d = a.nrows();
    let mut out: Vec<(f64, CMatrix)> = Vec::new();
    // iterate descending so the largest eigenvalue is outcome 0
    let mut i = d;
    while i > 0 {
        i -= 1;
        let v = eig.eigenvector(i);
        let proj = qmath::outer(&v, &v);
        match out.last_mut() {
            Some((val, q)) if (*val - eig.values[i]).abs() <= DEGENERACY_TOL => {
                *q += proj;
            }
            _ => out.push((eig.values[i], proj)),
        }
    }
    Ok(out)
}

/// Noisy measurement of a Hermitian observable: POVM elements
/// P_j = (1−p) Q_j + p λ_j I over the N distinct eigenvalues a_j of A, with
/// values x_j = (a_j − p ā)/(1−p), ā = Σ_j λ_j a_j.
///
/// `lambda = None` selects the uniform distribution. The output satisfies
/// A = Σ_j x_j P_j algebraically.
pub fn noisy_measurement(
    a: &CMatrix,
    p: f64,
    lambda: Option<&[f64]>,
) -> Result<UnbiasedObservable> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidProbability {
            value: p,
            range: "[0, 1)",
        });
    }
    let spectral = spectral_decompose(a)?;
    let n = spectral.len();
    let uniform = vec![1.0 / n as f64; n];
    let lambda = lambda.unwrap_or(&uniform);
    if lambda.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: lambda.len(),
        });
    }
    let mut sum = 0.0;
    for &l in lambda {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::InvalidProbability {
                value: l,
                range: "[0, 1]",
            });
        }
        sum += l;
    }
    if (sum - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::InvalidProbability {
            value: sum,
            range: "sum to 1",
        });
    }

    let d = a.nrows();
    let a_bar: f64 = spectral.iter().zip(lambda).map(|((aj, _), l)| aj * l).sum();
    let mut elements = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for ((aj, qj), &lj) in spectral.iter().zip(lambda) {
        elements.push(qj.scale(1.0 - p) + qmath::identity(d).scale(p * lj));
        values.push((aj - p * a_bar) / (1.0 - p));
    }
    UnbiasedObservable::for_observable(a.clone(), Povm { elements }, values, 1e-9)
}

/// Result of checking the unbiasedness invariant A = Σ_j x_j P_j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnbiasednessReport {
    pub max_deviation: f64,
    pub passes: bool,
}

/// Report ‖A − Σ_j x_j P_j‖_max and pass/fail against `tol` for a claimed
/// decomposition of `a`.
pub fn check_unbiased(
    a: &CMatrix,
    povm: &Povm,
    values: &[f64],
    tol: f64,
) -> Result<UnbiasednessReport> {
    if values.len() != povm.len() {
        return Err(Error::LengthMismatch {
            expected: povm.len(),
            found: values.len(),
        });
    }
    let d = povm.dim();
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: a.nrows(),
        });
    }
    let mut sum = CMatrix::zeros(d, d);
    for (x, p) in values.iter().zip(povm.elements()) {
        sum += p.scale(*x);
    }
    let max_deviation = qmath::max_abs_diff(a, &sum);
    Ok(UnbiasednessReport {
        max_deviation,
        passes: max_deviation <= tol,
    })
}

impl UnbiasedObservable {
    /// Check the stored decomposition against its own observable.
    pub fn check(&self, tol: f64) -> UnbiasednessReport {
        check_unbiased(&self.observable, &self.povm, &self.values, tol)
            .expect("stored decomposition is self-consistent")
    }
}

/// Expectation `Tr[Aρ]` evaluated through the POVM outcome distribution.
pub fn povm_expectation(obs: &UnbiasedObservable, rho: &DensityMatrix) -> Complex64 {
    obs.values()
        .iter()
        .zip(obs.povm().elements())
        .map(|(x, p)| (p * rho.matrix()).trace() * *x)
        .sum()
}
