//! Desk-scale toolkit for estimating weak values with controlled-SWAP circuits.
//!
//! Two copies of a system, prepared in states `rho_in` and `rho_fin`, pass
//! through a controlled-SWAP gate whose control qubit starts in |+⟩. Measuring
//! one copy with a POVM and the control in the X or Y basis yields outcome
//! statistics from which every expectation with respect to the complex measure
//! `q(j) = Tr[P_j rho_in rho_fin]` can be recovered — and with it the weak
//! value `W(A) = Tr[rho_fin A rho_in] / Tr[rho_fin rho_in]`, with a sample
//! complexity that does not depend on the system dimension.
//!
//! The crate is organized in layers:
//!
//! - [`qmath`] — dense complex linear algebra: Kronecker products, the SWAP
//!   operator, partial transposition, double-ket vectorization.
//! - [`qobjects`] — validated density matrices, POVMs, and unbiased
//!   observable decompositions (including noisy measurements).
//! - [`analytics`] — exact weak values, the weak-value measure, and double
//!   weak values; the ground-truth layer every estimator is checked against.
//! - [`protocol`] — exact outcome distributions of the four controlled-SWAP
//!   circuit variants, with an independent circuit-level oracle.
//! - [`estimator`] — seeded Monte Carlo sampling, the unbiased reweighting
//!   estimator, Hoeffding error bounds, and the sample-size planner.
//! - [`twotime`] — the two-time state calculus: functional/operator
//!   correspondence, PPT classification, and pseudo-expectations.
//! - [`purify`] — purification constructions reducing mixed-state weak values
//!   to pure pre- and post-selections.
//! - [`random`] — seeded generators for random states, observables, and POVMs.
//! - [`serial`] — serialization schemas for matrices and complex scalars.

pub mod analytics;
pub mod error;
pub mod estimator;
pub mod protocol;
pub mod purify;
pub mod qmath;
pub mod qobjects;
pub mod random;
pub mod serial;
pub mod twotime;

pub use error::{Error, Result};
pub use estimator::{EstimateReport, SampleBatch, SamplePlan};
pub use protocol::{ControlMode, OutcomeDistribution};
pub use purify::PurifiedPair;
pub use qmath::{CMatrix, CVector};
pub use qobjects::{DensityMatrix, Povm, UnbiasedObservable};
pub use twotime::{TwoTimeState, TwoTimeVector};
