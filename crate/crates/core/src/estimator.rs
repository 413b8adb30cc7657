//! Monte Carlo estimation on top of the circuit distributions: seeded
//! sampling, the unbiased reweighting estimator, Hoeffding error bounds, and
//! the sample-size planner.
//!
//! The key identity: for any outcome function z_j, the reweighted variable
//! z̃_{j,c} = 2 z_j (−1)^c [θ(1−c) − i θ(c−2)] has expectation Σ_j z_j q_j
//! under the circuit distribution, where q is the complex weak-value measure.
//! In split mode the control is measured projectively in the X basis for half
//! the runs and the Y basis for the other half; the real part of the target
//! is estimated from the X half with weights (−1)^c̄ z_j, the imaginary part
//! from the Y half with weights −(−1)^c̄ z_j, and the overlap
//! μ = Tr[rho_in rho_fin] from the same X half with z ≡ 1.
//!
//! With probability at least 1−δ each, the split-mode estimates satisfy
//!
//! ```text
//! ε_ν = 2 x_max √(ln(2/δ)/K)      (numerator, real or imaginary part)
//! ε_μ = 2 √(ln(2/δ)/K)            (overlap)
//! ε   = √2 (x_max + |Ŵ|) / (μ̂/ε_μ − 1)   (the weak-value ratio, 1−3δ)
//! ```
//!
//! and inverting the last bound gives the planner: with Λ = √2(x_max+|W|)/ε,
//! K = (4 ln(6/δ)/μ²)(Λ+1)² runs suffice for additive error ε with
//! probability 1−δ; the leading term for small ε is
//! (8 ln(6/δ)/ε²)((x_max+|W|)/μ)².
//!
//! Sampling is deterministic in (seed, k, mode): draws are partitioned into
//! fixed-size chunks, and chunk `i` of half `h` consumes the ChaCha stream
//! `2i + h` of the seeded generator, so any parallel execution over chunks
//! reproduces the sequential counts exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{self, ControlMode, OutcomeDistribution};
use crate::qobjects::{DensityMatrix, UnbiasedObservable};
use crate::serial::complex_pair;

/// Draws per RNG stream chunk; fixed so that chunked parallel sampling and
/// sequential sampling agree.
const SAMPLE_CHUNK: u64 = 1 << 16;

/// The reweighting variable z̃_{j,c} = 2 z_j (−1)^c [θ(1−c) − i θ(c−2)].
pub fn tilde_variable(z: Complex64, c: usize) -> Result<Complex64> {
    let factor = match c {
        0 => Complex64::new(2.0, 0.0),
        1 => Complex64::new(-2.0, 0.0),
        2 => Complex64::new(0.0, -2.0),
        3 => Complex64::new(0.0, 2.0),
        _ => return Err(Error::ControlOutOfRange { value: c }),
    };
    Ok(z * factor)
}

/// Outcome counts from `k` runs of a circuit distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    /// Counts per (system outcome, control outcome), control fastest.
    counts: Vec<u64>,
    k: u64,
    seed: u64,
    mode: ControlMode,
}

impl SampleBatch {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, sys: usize, c: usize) -> u64 {
        self.counts[sys * 4 + c]
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> ControlMode {
        self.mode
    }

    pub fn system_outcomes(&self) -> usize {
        self.counts.len() / 4
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    let mut cum: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p / total;
            acc
        })
        .collect();
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    cum
}

fn draw_into(cum: &[f64], n: u64, seed: u64, half: u64, counts: &mut [u64]) {
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    for chunk in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2 * chunk + half);
        let in_chunk = SAMPLE_CHUNK.min(n - chunk * SAMPLE_CHUNK);
        for _ in 0..in_chunk {
            let u: f64 = rng.gen();
            let idx = cum.partition_point(|&edge| edge <= u);
            counts[idx] += 1;
        }
    }
}

/// Draw `k` i.i.d. outcomes from a circuit distribution.
///
/// In split mode exactly ⌊k/2⌋ draws use the X-basis conditional distribution
/// {2R_0, 2R_1} (landing on control outcomes 0 and 1) and the remaining
/// draws use the Y-basis pair {2R_2, 2R_3} (outcomes 2 and 3).
pub fn sample(
    dist: &OutcomeDistribution,
    k: u64,
    seed: u64,
    mode: ControlMode,
) -> Result<SampleBatch> {
    if k < 1 {
        return Err(Error::InsufficientSamples { k, min: 1 });
    }
    let n_sys = dist.system_outcomes();
    let mut counts = vec![0u64; n_sys * 4];
    match mode {
        ControlMode::Random4 => {
            let cum = cumulative(dist.probs());
            let mut raw = vec![0u64; n_sys * 4];
            draw_into(&cum, k, seed, 0, &mut raw);
            counts.copy_from_slice(&raw);
        }
        ControlMode::Split => {
            let k_re = k / 2;
            let k_im = k - k_re;
            let cum_re = cumulative(&dist.conditional_re());
            let cum_im = cumulative(&dist.conditional_im());
            let mut re_counts = vec![0u64; n_sys * 2];
            let mut im_counts = vec![0u64; n_sys * 2];
            draw_into(&cum_re, k_re, seed, 0, &mut re_counts);
            draw_into(&cum_im, k_im, seed, 1, &mut im_counts);
            for s in 0..n_sys {
                counts[s * 4] = re_counts[s * 2];
                counts[s * 4 + 1] = re_counts[s * 2 + 1];
                counts[s * 4 + 2] = im_counts[s * 2];
                counts[s * 4 + 3] = im_counts[s * 2 + 1];
            }
        }
    }
    Ok(SampleBatch {
        counts,
        k,
        seed,
        mode,
    })
}

/// Empirical estimate of the measure expectation `E_q[Z] = Σ_j z_j q_j` from
/// a sample batch; unbiased in either control mode.
pub fn estimate_measure_expectation(batch: &SampleBatch, z: &[Complex64]) -> Complex64 {
    assert_eq!(
        z.len(),
        batch.system_outcomes(),
        "one z value per system outcome"
    );
    match batch.mode() {
        ControlMode::Random4 => {
            let mut sum = Complex64::new(0.0, 0.0);
            for (s, zs) in z.iter().enumerate() {
                for c in 0..4 {
                    let n = batch.count(s, c);
                    if n > 0 {
                        sum += tilde_variable(*zs, c).expect("c in range") * n as f64;
                    }
                }
            }
            sum / batch.k() as f64
        }
        ControlMode::Split => {
            let (re, k_re) = split_half_mean(batch, z, 0);
            let (im, k_im) = split_half_mean(batch, z, 2);
            debug_assert_eq!(k_re + k_im, batch.k());
            re + (-im) * Complex64::new(0.0, 1.0)
        }
    }
}

/// Mean of (−1)^c̄ z_s over the half starting at control offset `base`
/// (0 for the X half, 2 for the Y half), with the half's own draw count.
fn split_half_mean(batch: &SampleBatch, z: &[Complex64], base: usize) -> (Complex64, u64) {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut total = 0u64;
    for (s, zs) in z.iter().enumerate() {
        let n0 = batch.count(s, base);
        let n1 = batch.count(s, base + 1);
        total += n0 + n1;
        sum += zs * (n0 as f64 - n1 as f64);
    }
    if total == 0 {
        (Complex64::new(0.0, 0.0), 0)
    } else {
        (sum / total as f64, total)
    }
}

/// Infinite-sample limit of [`estimate_measure_expectation`]: the same
/// reweighting applied to exact probabilities. Equals Σ_j z_j q_j up to
/// rounding in either mode.
pub fn exact_measure_expectation(
    dist: &OutcomeDistribution,
    z: &[Complex64],
    mode: ControlMode,
) -> Complex64 {
    assert_eq!(
        z.len(),
        dist.system_outcomes(),
        "one z value per system outcome"
    );
    match mode {
        ControlMode::Random4 => {
            let mut sum = Complex64::new(0.0, 0.0);
            for (s, zs) in z.iter().enumerate() {
                for c in 0..4 {
                    sum += tilde_variable(*zs, c).expect("c in range") * dist.prob(s, c);
                }
            }
            sum
        }
        ControlMode::Split => {
            let re_table = dist.conditional_re();
            let im_table = dist.conditional_im();
            let mut re = Complex64::new(0.0, 0.0);
            let mut im = Complex64::new(0.0, 0.0);
            for (s, zs) in z.iter().enumerate() {
                re += zs * (re_table[s * 2] - re_table[s * 2 + 1]);
                im += zs * -(im_table[s * 2] - im_table[s * 2 + 1]);
            }
            re + im * Complex64::new(0.0, 1.0)
        }
    }
}

/// Numerator bound ε_ν = 2 x_max √(ln(2/δ)/K).
pub fn epsilon_nu(x_max: f64, k: u64, delta: f64) -> f64 {
    x_max * epsilon_mu(k, delta)
}

/// Overlap bound ε_μ = 2 √(ln(2/δ)/K).
pub fn epsilon_mu(k: u64, delta: f64) -> f64 {
    2.0 * ((2.0 / delta).ln() / k as f64).sqrt()
}

/// Ratio bound ε = √2 (x_max + |Ŵ|) / (μ̂/ε_μ − 1); `None` when μ̂ ≤ ε_μ,
/// where the bound is unbounded.
pub fn epsilon_total(x_max: f64, w_abs: f64, mu_hat: f64, eps_mu: f64) -> Option<f64> {
    if mu_hat <= eps_mu {
        return None;
    }
    Some(2f64.sqrt() * (x_max + w_abs) / (mu_hat / eps_mu - 1.0))
}

/// A ratio estimate with all of its bound components; carries the seed and
/// mode needed to reproduce the run exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    #[serde(with = "complex_pair")]
    pub estimate: Complex64,
    pub k: u64,
    pub delta: f64,
    pub seed: u64,
    pub mode: ControlMode,
    pub x_max: f64,
    /// Overlap (denominator) estimate μ̂.
    pub mu_hat: f64,
    /// Bounds hold for split-mode sampling; absent in random4 mode.
    pub epsilon_nu: Option<f64>,
    pub epsilon_mu: Option<f64>,
    pub epsilon_total: Option<f64>,
}

/// Generic ratio estimation over a circuit distribution: numerator weights
/// `z`, denominator weights ≡ 1 on the same batch.
fn ratio_estimate(
    dist: &OutcomeDistribution,
    z: &[Complex64],
    x_max: f64,
    k: u64,
    delta: f64,
    seed: u64,
    mode: ControlMode,
) -> Result<EstimateReport> {
    if k < 2 {
        return Err(Error::InsufficientSamples { k, min: 2 });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidProbability {
            value: delta,
            range: "(0, 1)",
        });
    }
    let batch = sample(dist, k, seed, mode)?;
    let ones = vec![Complex64::new(1.0, 0.0); z.len()];
    let eps_mu = epsilon_mu(k, delta);
    match mode {
        ControlMode::Split => {
            let (nu_re, _) = split_half_mean(&batch, z, 0);
            let (nu_im_raw, _) = split_half_mean(&batch, z, 2);
            let nu = nu_re - nu_im_raw * Complex64::new(0.0, 1.0);
            // μ̂ comes from the same X-basis sub-batch used for the real part
            let (mu, _) = split_half_mean(&batch, &ones, 0);
            let mu_hat = mu.re;
            if mu_hat <= eps_mu {
                return Err(Error::OverlapTooSmall {
                    estimate: mu_hat,
                    bound: eps_mu,
                });
            }
            let estimate = nu / mu_hat;
            Ok(EstimateReport {
                estimate,
                k,
                delta,
                seed,
                mode,
                x_max,
                mu_hat,
                epsilon_nu: Some(epsilon_nu(x_max, k, delta)),
                epsilon_mu: Some(eps_mu),
                epsilon_total: epsilon_total(x_max, estimate.norm(), mu_hat, eps_mu),
            })
        }
        ControlMode::Random4 => {
            let nu = estimate_measure_expectation(&batch, z);
            let den = estimate_measure_expectation(&batch, &ones);
            // the formal bounds are proved for split sampling; ε_μ only
            // serves as a noise floor on the denominator here
            if den.norm() <= eps_mu {
                return Err(Error::OverlapTooSmall {
                    estimate: den.norm(),
                    bound: eps_mu,
                });
            }
            Ok(EstimateReport {
                estimate: nu / den,
                k,
                delta,
                seed,
                mode,
                x_max,
                mu_hat: den.re,
                epsilon_nu: None,
                epsilon_mu: None,
                epsilon_total: None,
            })
        }
    }
}

/// Estimate the weak value W(A | rho_in, rho_fin) from `k` circuit runs.
pub fn estimate_weak_value(
    obs: &UnbiasedObservable,
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
    k: u64,
    delta: f64,
    seed: u64,
    mode: ControlMode,
) -> Result<EstimateReport> {
    let dist = protocol::dist_fig1a(obs.povm(), rho_in, rho_fin)?;
    let z: Vec<Complex64> = obs
        .values()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    ratio_estimate(&dist, &z, obs.x_max(), k, delta, seed, mode)
}

/// Estimate the double weak value W₂(A, B | rho_in, rho_fin) from the
/// two-measurement circuit, reweighting with z_{jk} = x_j y_k.
///
/// The error bound reuses the ratio bound with x_max replaced by
/// x_max·y_max, which bounds the reweighted variable the same way.
#[allow(clippy::too_many_arguments)]
pub fn estimate_double_weak_value(
    obs_a: &UnbiasedObservable,
    obs_b: &UnbiasedObservable,
    rho_in: &DensityMatrix,
    rho_fin: &DensityMatrix,
    k: u64,
    delta: f64,
    seed: u64,
    mode: ControlMode,
) -> Result<EstimateReport> {
    let dist = protocol::dist_fig1b(obs_a.povm(), obs_b.povm(), rho_in, rho_fin)?;
    let mut z = Vec::with_capacity(obs_a.len() * obs_b.len());
    for &x in obs_a.values() {
        for &y in obs_b.values() {
            z.push(Complex64::new(x * y, 0.0));
        }
    }
    ratio_estimate(
        &dist,
        &z,
        obs_a.x_max() * obs_b.x_max(),
        k,
        delta,
        seed,
        mode,
    )
}

/// Estimate the pair-measurement SWAP functional
/// Tr[(A⊗B)·ρ·SWAP] / Tr[ρ·SWAP] from the bipartite-state circuit with two
/// local POVMs, reweighting with z_{jk} = x_j y_k.
pub fn estimate_pair_swap_functional(
    obs_a: &UnbiasedObservable,
    obs_b: &UnbiasedObservable,
    rho_joint: &DensityMatrix,
    k: u64,
    delta: f64,
    seed: u64,
    mode: ControlMode,
) -> Result<EstimateReport> {
    let dist = protocol::dist_fig1c(obs_a.povm(), obs_b.povm(), rho_joint)?;
    let mut z = Vec::with_capacity(obs_a.len() * obs_b.len());
    for &x in obs_a.values() {
        for &y in obs_b.values() {
            z.push(Complex64::new(x * y, 0.0));
        }
    }
    ratio_estimate(
        &dist,
        &z,
        obs_a.x_max() * obs_b.x_max(),
        k,
        delta,
        seed,
        mode,
    )
}

/// Estimate the SWAP functional ratio Tr[O·ρ·SWAP] / Tr[ρ·SWAP] from the
/// joint-measurement circuit on a bipartite state.
pub fn estimate_swap_functional(
    joint_obs: &UnbiasedObservable,
    rho_joint: &DensityMatrix,
    k: u64,
    delta: f64,
    seed: u64,
    mode: ControlMode,
) -> Result<EstimateReport> {
    let dist = protocol::dist_fig1d(joint_obs.povm(), rho_joint)?;
    let z: Vec<Complex64> = joint_obs
        .values()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    ratio_estimate(&dist, &z, joint_obs.x_max(), k, delta, seed, mode)
}

/// Planned run count for a target additive error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    /// Finite-K form K = (4 ln(6/δ)/μ²)(Λ+1)², Λ = √2(x_max+|W|)/ε, rounded
    /// up. This is the count to use.
    pub exact: u64,
    /// Leading term (8 ln(6/δ)/ε²)((x_max+|W|)/μ)², the small-ε asymptote;
    /// reported alongside since the two diverge for loose ε.
    pub leading: f64,
}

/// Invert the ratio bound into a run count guaranteeing additive error
/// `epsilon` with probability at least 1−`delta`.
///
/// `w_magnitude` is an a-priori bound on |W|; when unknown, x_max is the
/// natural guess, though anomalous weak values can exceed it.
pub fn plan_samples(
    epsilon: f64,
    delta: f64,
    x_max: f64,
    w_magnitude: f64,
    overlap: f64,
) -> Result<SamplePlan> {
    if epsilon <= 0.0 || x_max <= 0.0 || w_magnitude < 0.0 {
        return Err(Error::InvalidProbability {
            value: epsilon.min(x_max),
            range: "(0, inf)",
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidProbability {
            value: delta,
            range: "(0, 1)",
        });
    }
    if !(overlap > 0.0 && overlap <= 1.0) {
        return Err(Error::InvalidProbability {
            value: overlap,
            range: "(0, 1]",
        });
    }
    let log_term = (6.0 / delta).ln();
    let lambda = 2f64.sqrt() * (x_max + w_magnitude) / epsilon;
    let exact = 4.0 * log_term / (overlap * overlap) * (lambda + 1.0) * (lambda + 1.0);
    let leading = 8.0 * log_term / (epsilon * epsilon) * ((x_max + w_magnitude) / overlap).powi(2);
    Ok(SamplePlan {
        exact: exact.ceil() as u64,
        leading,
    })
}
