//! Seeded generators for random states, observables, and measurements, used
//! by tests and reproducible experiments.

use num_complex::Complex64;
use rand::Rng;

use crate::qmath::{CMatrix, CVector};
use crate::qobjects::{noisy_measurement, DensityMatrix, UnbiasedObservable};

/// Standard complex Gaussian via Box-Muller.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u1: f64 = loop {
        let u = rng.gen::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(radius * angle.cos(), radius * angle.sin())
}

/// Ginibre matrix: independent standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| random_complex(rng))
}

/// Random Hermitian matrix (G + G†)/2 with Gaussian G.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(d, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-like random pure state: normalized Gaussian vector.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(d, |_, _| random_complex(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v.unscale(n);
        }
    }
}

/// Random rank-`rank` density matrix: ρ = G G†/Tr[G G†] with a d×rank
/// Gaussian G.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let rank = rank.clamp(1, d);
    let g = CMatrix::from_fn(d, rank, |_, _| random_complex(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr)).expect("Gaussian construction is a valid state")
}

/// Random bipartite density matrix on H_d ⊗ H_d of the given rank.
pub fn random_bipartite_density<R: Rng + ?Sized>(
    d: usize,
    rank: usize,
    rng: &mut R,
) -> DensityMatrix {
    let n = d * d;
    let rank = rank.clamp(1, n);
    let g = CMatrix::from_fn(n, rank, |_, _| random_complex(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::bipartite(m.unscale(tr), d, d).expect("Gaussian construction is a valid state")
}

/// Random noisy measurement of a random Hermitian observable: a generic
/// unbiased POVM decomposition.
pub fn random_unbiased_observable<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnbiasedObservable {
    let a = random_hermitian(d, rng);
    let p: f64 = rng.gen_range(0.0..0.8);
    noisy_measurement(&a, p, None).expect("random Hermitian observable decomposes")
}

/// Random projective measurement of a random Hermitian observable.
pub fn random_projective_observable<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnbiasedObservable {
    let a = random_hermitian(d, rng);
    noisy_measurement(&a, 0.0, None).expect("random Hermitian observable decomposes")
}

/// Random positive semidefinite operator on H_d ⊗ H_d of the given rank,
/// with unit trace scale.
pub fn random_positive_operator<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
    let rank = rank.clamp(1, n);
    let g = CMatrix::from_fn(n, rank, |_, _| random_complex(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m.unscale(tr)
}
