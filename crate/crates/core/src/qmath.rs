//! Dense complex linear algebra and the tensor-network primitives the rest of
//! the crate is built on.
//!
//! Everything works in a fixed computational basis {|0⟩, …, |d−1⟩}: Kronecker
//! products, the SWAP operator, partial transposition of the second tensor
//! factor, and the double-ket vectorization |A⟩⟩ = Σ_j A|j⟩ ⊗ |j⟩ are all
//! defined with respect to this basis. Target dimensions are desk scale
//! (d ≲ 32 per factor), so storage is dense throughout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// Default absolute entrywise tolerance for equality and validation checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Computational basis vector |i⟩ in dimension `d`.
pub fn basis_state(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = C_ONE;
    v
}

/// Build a vector from complex entries.
pub fn cvec(entries: &[Complex64]) -> CVector {
    CVector::from_column_slice(entries)
}

/// Build a matrix from row-major complex entries.
pub fn cmat(rows: usize, cols: usize, entries: &[Complex64]) -> CMatrix {
    assert_eq!(
        rows * cols,
        entries.len(),
        "entry count must match rows*cols"
    );
    CMatrix::from_row_slice(rows, cols, entries)
}

/// Outer product |u⟩⟨v|.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// Projector |v⟩⟨v| / ⟨v|v⟩.
pub fn projector(v: &CVector) -> CMatrix {
    let n2 = v.norm_squared();
    outer(v, v).unscale(n2)
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of vectors, |a⟩ ⊗ |b⟩.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let (na, nb) = (a.len(), b.len());
    CVector::from_fn(na * nb, |i, _| a[i / nb] * b[i % nb])
}

/// The SWAP operator on H ⊗ H, defined by SWAP(|α⟩ ⊗ |β⟩) = |β⟩ ⊗ |α⟩.
///
/// It is a d²×d² permutation matrix, Hermitian, unitary, and squares to the
/// identity.
pub fn swap_operator(d: usize) -> CMatrix {
    let mut s = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = C_ONE;
        }
    }
    s
}

/// Partial transpose over the second tensor factor of a (dA·dB)×(dA·dB)
/// matrix: entry ((i,j),(k,l)) ↦ ((i,l),(k,j)).
pub fn partial_transpose_2(m: &CMatrix, da: usize, db: usize) -> Result<CMatrix> {
    let n = da * db;
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    let mut out = CMatrix::zeros(n, n);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    out[(i * db + l, k * db + j)] = m[(i * db + j, k * db + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Double-ket vectorization |A⟩⟩ = Σ_j A|j⟩ ⊗ |j⟩ of a square matrix.
///
/// In the computational basis this is the row-major flattening of `A`, and it
/// satisfies ⟨⟨A|B⟩⟩ = Tr[A†B].
pub fn double_ket(a: &CMatrix) -> Result<CVector> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let d = a.nrows();
    Ok(CVector::from_fn(d * d, |i, _| a[(i / d, i % d)]))
}

/// Inverse of [`double_ket`]: reshape a d²-dimensional vector back to the
/// matrix A with |A⟩⟩ = v.
pub fn double_ket_inverse(v: &CVector) -> Result<CMatrix> {
    let n = v.len();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: n,
        });
    }
    Ok(CMatrix::from_fn(d, d, |i, j| v[i * d + j]))
}

/// The canonical unnormalized maximally entangled state |I⟩⟩ = Σ_i |i⟩ ⊗ |i⟩.
pub fn max_entangled_unnorm(d: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = C_ONE;
    }
    v
}

/// Maximum entrywise modulus of the difference of two matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in comparison");
    let mut m = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        m = m.max((x - y).norm());
    }
    m
}

/// Entrywise equality within an absolute tolerance.
pub fn approx_eq(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_diff(a, b) <= tol
}

/// Maximum entrywise modulus of M − M†.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.nrows() == m.ncols() && hermiticity_deviation(m) <= tol
}

/// Whether M†M = I within an absolute entrywise tolerance.
pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.nrows() == m.ncols() && max_abs_diff(&(m.adjoint() * m), &identity(m.nrows())) <= tol
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// ascending order; column `i` of `vectors` is the eigenvector for
/// `values[i]`.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn eigenvector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized as (M + M†)/2 before the solve, so callers must
/// check Hermiticity themselves when it is a contract. Exactly diagonal
/// matrices short-circuit to the computational basis, which keeps
/// decompositions of diagonal operators deterministic and exact.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let d = m.nrows();
    let mut diagonal = true;
    'scan: for i in 0..d {
        for j in 0..d {
            if i != j && m[(i, j)] != C_ZERO {
                diagonal = false;
                break 'scan;
            }
        }
    }
    let (mut vals, vecs): (Vec<f64>, Vec<CVector>) = if diagonal {
        (
            (0..d).map(|i| m[(i, i)].re).collect(),
            (0..d).map(|i| basis_state(d, i)).collect(),
        )
    } else {
        let h = (m + m.adjoint()).scale(0.5);
        let eig = nalgebra::SymmetricEigen::new(h);
        (
            eig.eigenvalues.iter().copied().collect(),
            (0..d)
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect(),
        )
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let vectors = CMatrix::from_fn(d, d, |r, c| vecs[order[c]][r]);
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(HermitianEigen {
        values: vals,
        vectors,
    })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigen(m)?.min_value())
}

// Common single-qubit operators and states, used by presets and tests.

pub fn pauli_x() -> CMatrix {
    cmat(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO])
}

pub fn pauli_y() -> CMatrix {
    cmat(2, 2, &[C_ZERO, -C_I, C_I, C_ZERO])
}

pub fn pauli_z() -> CMatrix {
    cmat(2, 2, &[C_ONE, C_ZERO, C_ZERO, -C_ONE])
}

pub fn ket_zero() -> CVector {
    basis_state(2, 0)
}

pub fn ket_one() -> CVector {
    basis_state(2, 1)
}

pub fn ket_plus() -> CVector {
    cvec(&[C_ONE, C_ONE]).unscale(2f64.sqrt())
}

pub fn ket_minus() -> CVector {
    cvec(&[C_ONE, -C_ONE]).unscale(2f64.sqrt())
}

pub fn ket_plus_i() -> CVector {
    cvec(&[C_ONE, C_I]).unscale(2f64.sqrt())
}

pub fn ket_minus_i() -> CVector {
    cvec(&[C_ONE, -C_I]).unscale(2f64.sqrt())
}
