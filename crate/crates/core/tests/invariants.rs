//! Cross-module identities on randomized instances: analytic oracles against
//! circuit distributions, estimators, two-time states, and purifications.

use cswap_core::analytics;
use cswap_core::estimator;
use cswap_core::protocol::{self, ControlMode};
use cswap_core::purify;
use cswap_core::qmath::{self, C_ONE};
use cswap_core::qobjects::{noisy_measurement, DensityMatrix, UnbiasedObservable};
use cswap_core::random;
use cswap_core::twotime::{self, FunctionalTable, TwoTimeState, TwoTimeVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_lambda<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    v
}

#[test]
fn trace_identity_with_swap() {
    let mut rng = rng(1);
    for d in 2..=4 {
        let swap = qmath::swap_operator(d);
        for _ in 0..10 {
            let a = random::random_matrix(d, &mut rng);
            let b = random::random_matrix(d, &mut rng);
            let lhs = (qmath::kron(&a, &b) * &swap).trace();
            let rhs = (&a * &b).trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}

#[test]
fn double_ket_inner_product_is_hilbert_schmidt() {
    let mut rng = rng(2);
    for d in 2..=4 {
        for _ in 0..10 {
            let m = random::random_matrix(d, &mut rng);
            let n = random::random_matrix(d, &mut rng);
            let lhs = qmath::double_ket(&m)
                .unwrap()
                .dotc(&qmath::double_ket(&n).unwrap());
            let rhs = (m.adjoint() * &n).trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}

#[test]
fn swap_overlap_equals_double_ket_sandwich() {
    let mut rng = rng(3);
    for _ in 0..20 {
        let rho = random::random_bipartite_density(2, 4, &mut rng);
        let id = qmath::max_entangled_unnorm(2);
        let sandwich = id.dotc(&(rho.matrix() * &id)).re;
        assert!((twotime::swap_overlap(&rho).unwrap() - sandwich).abs() < 1e-12);
    }
}

#[test]
fn noisy_measurements_are_always_unbiased() {
    let mut rng = rng(4);
    for d in 2..=4 {
        for _ in 0..10 {
            let a = random::random_hermitian(d, &mut rng);
            let p = rng.gen_range(0.0..0.95);
            let spectral_outcomes = noisy_measurement(&a, 0.0, None).unwrap().len();
            let lambda = random_lambda(spectral_outcomes, &mut rng);
            let obs = noisy_measurement(&a, p, Some(&lambda)).unwrap();
            assert!(obs.check(1e-9).passes);
        }
    }
}

#[test]
fn measure_ratio_equals_weak_value_across_dimensions() {
    let mut rng = rng(5);
    for d in 2..=4 {
        for _ in 0..10 {
            let rho_in = random::random_density(d, d, &mut rng);
            let rho_fin = random::random_density(d, 2, &mut rng);
            let obs = random::random_unbiased_observable(d, &mut rng);
            let q = analytics::wv_measure(obs.povm(), &rho_in, &rho_fin).unwrap();
            let via = analytics::wv_from_measure(&obs, &q).unwrap();
            let direct = analytics::weak_value(obs.observable(), &rho_in, &rho_fin).unwrap();
            assert!((via.value - direct.value).norm() < 1e-12);
        }
    }
}

#[test]
fn pure_state_double_weak_value_factorizes() {
    let mut rng = rng(6);
    for d in [2usize, 3] {
        for _ in 0..10 {
            let psi_in = random::random_pure(d, &mut rng);
            let psi_fin = random::random_pure(d, &mut rng);
            let a = random::random_hermitian(d, &mut rng);
            let b = random::random_hermitian(d, &mut rng);
            let rho_in = DensityMatrix::from_pure(&psi_in).unwrap();
            let rho_fin = DensityMatrix::from_pure(&psi_fin).unwrap();
            let w2 = analytics::double_weak_value(&a, &b, &rho_in, &rho_fin).unwrap();
            let forward = analytics::pure_weak_value(&a, &psi_in, &psi_fin).unwrap();
            let backward = analytics::pure_weak_value(&b, &psi_fin, &psi_in).unwrap();
            assert!((w2 - forward * backward).norm() < 1e-10);
        }
    }
}

#[test]
fn correlation_decomposition_resums_on_mixed_states() {
    let mut rng = rng(7);
    for d in [2usize, 3] {
        for _ in 0..10 {
            let rho_in = random::random_density(d, d, &mut rng);
            let rho_fin = random::random_density(d, d, &mut rng);
            let a = random::random_hermitian(d, &mut rng);
            let b = random::random_hermitian(d, &mut rng);
            let dec = analytics::dwv_correlation_decomposition(&rho_in, &rho_fin, &a, &b).unwrap();
            let w2 = analytics::double_weak_value(&a, &b, &rho_in, &rho_fin).unwrap();
            assert!((dec.weighted_sum() - w2).norm() < 1e-10);
            assert!((dec.total_weight() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn closed_form_matches_circuit_oracle_on_random_instances() {
    let mut rng = rng(8);
    for d in 2..=4 {
        for _ in 0..20 {
            let rho_in = random::random_density(d, d, &mut rng);
            let rho_fin = random::random_density(d, 2, &mut rng);
            let obs = random::random_unbiased_observable(d, &mut rng);
            let closed = protocol::dist_fig1a(obs.povm(), &rho_in, &rho_fin).unwrap();
            let oracle = protocol::circuit_oracle_fig1a(obs.povm(), &rho_in, &rho_fin).unwrap();
            for (a, b) in closed.probs().iter().zip(oracle.probs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn marginalization_chain_links_all_four_circuits() {
    let mut rng = rng(9);
    for _ in 0..5 {
        let rho_in = random::random_density(2, 2, &mut rng);
        let rho_fin = random::random_density(2, 1, &mut rng);
        let obs_a = random::random_unbiased_observable(2, &mut rng);
        let obs_b = random::random_projective_observable(2, &mut rng);

        // fig1d with a product POVM reproduces fig1c
        let joint =
            DensityMatrix::bipartite(qmath::kron(rho_in.matrix(), rho_fin.matrix()), 2, 2).unwrap();
        let product_obs = UnbiasedObservable::product(&obs_a, &obs_b);
        let d_table = protocol::dist_fig1d(product_obs.povm(), &joint).unwrap();
        let c_table = protocol::dist_fig1c(obs_a.povm(), obs_b.povm(), &joint).unwrap();
        for (x, y) in d_table.probs().iter().zip(c_table.probs()) {
            assert!((x - y).abs() < 1e-12);
        }

        // fig1c on the product state reproduces fig1b
        let b_table = protocol::dist_fig1b(obs_a.povm(), obs_b.povm(), &rho_in, &rho_fin).unwrap();
        for (x, y) in c_table.probs().iter().zip(b_table.probs()) {
            assert!((x - y).abs() < 1e-12);
        }

        // fig1b with a trivial second POVM marginalizes to fig1a
        let b_trivial = protocol::dist_fig1b(
            obs_a.povm(),
            &cswap_core::Povm::trivial(2),
            &rho_in,
            &rho_fin,
        )
        .unwrap();
        let collapsed = b_trivial.marginal_over_second().unwrap();
        let a_table = protocol::dist_fig1a(obs_a.povm(), &rho_in, &rho_fin).unwrap();
        for (x, y) in collapsed.probs().iter().zip(a_table.probs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn exact_reweighting_reproduces_all_induced_measures() {
    let mut rng = rng(10);
    for _ in 0..10 {
        let rho_in = random::random_density(2, 2, &mut rng);
        let rho_fin = random::random_density(2, 2, &mut rng);
        let obs_a = random::random_unbiased_observable(2, &mut rng);
        let obs_b = random::random_projective_observable(2, &mut rng);
        let z: Vec<Complex64> = (0..obs_a.len() * obs_b.len())
            .map(|_| random::random_complex(&mut rng))
            .collect();

        let dist = protocol::dist_fig1b(obs_a.povm(), obs_b.povm(), &rho_in, &rho_fin).unwrap();
        let q = protocol::measure_fig1b(obs_a.povm(), obs_b.povm(), &rho_in, &rho_fin);
        let truth: Complex64 = z.iter().zip(&q).map(|(zs, qs)| zs * qs).sum();
        for mode in [ControlMode::Random4, ControlMode::Split] {
            let via = estimator::exact_measure_expectation(&dist, &z, mode);
            assert!((via - truth).norm() < 1e-12);
        }

        // joint-state circuit against its SWAP measure
        let joint = random::random_bipartite_density(2, 4, &mut rng);
        let dist_c = protocol::dist_fig1c(obs_a.povm(), obs_b.povm(), &joint).unwrap();
        let q_c = protocol::measure_fig1c(obs_a.povm(), obs_b.povm(), &joint).unwrap();
        let truth_c: Complex64 = z.iter().zip(&q_c).map(|(zs, qs)| zs * qs).sum();
        for mode in [ControlMode::Random4, ControlMode::Split] {
            let via = estimator::exact_measure_expectation(&dist_c, &z, mode);
            assert!((via - truth_c).norm() < 1e-12);
        }
    }
}

#[test]
fn two_time_positivity_both_directions() {
    let mut rng = rng(11);
    for d in [2usize, 3] {
        for _ in 0..10 {
            let p = random::random_positive_operator(d * d, d, &mut rng);
            let state = TwoTimeState::new(p).unwrap();
            for _ in 0..10 {
                let a = random::random_matrix(d, &mut rng);
                let val = state.eval(&a, &a.adjoint()).unwrap();
                assert!(val.re >= -1e-10);
                assert!(val.im.abs() < 1e-10);
            }
        }
        // indefinite operators are rejected and witnessed
        for _ in 0..5 {
            let mut h = random::random_hermitian(d * d, &mut rng);
            let eig = qmath::hermitian_eigen(&h).unwrap();
            if eig.min_value() > -0.1 {
                // push one eigenvalue negative
                let v = eig.eigenvector(0);
                h -= qmath::outer(&v, &v).scale(eig.min_value().abs() + 1.0);
            }
            let table = FunctionalTable::from_operator(&h).unwrap();
            assert!(twotime::state_from_functional(&table).is_err());
            let witness = twotime::negativity_witness(&table).unwrap();
            let val = table.eval(&witness, &witness.adjoint()).unwrap();
            assert!(val.re < 0.0);
        }
    }
}

#[test]
fn functional_table_round_trip_is_identity() {
    let mut rng = rng(12);
    for d in [2usize, 3] {
        for _ in 0..10 {
            let p = random::random_positive_operator(d * d, d * d, &mut rng);
            let state = TwoTimeState::new(p.clone()).unwrap();
            let recovered =
                twotime::state_from_functional(&FunctionalTable::from_state(&state)).unwrap();
            assert!(qmath::approx_eq(recovered.operator(), &p, 1e-10));
        }
    }
}

#[test]
fn normalized_states_normalize() {
    let mut rng = rng(13);
    for d in [2usize, 3] {
        for _ in 0..10 {
            let rho = random::random_bipartite_density(d, d * d, &mut rng);
            let state = twotime::normalized_from_density(&rho).unwrap();
            let one = state
                .eval(&qmath::identity(d), &qmath::identity(d))
                .unwrap();
            assert!((one - C_ONE).norm() < 1e-12);
        }
    }
}

#[test]
fn product_two_time_states_evaluate_double_weak_values() {
    let mut rng = rng(14);
    for d in [2usize, 3] {
        for _ in 0..10 {
            let rho_in = random::random_density(d, d, &mut rng);
            let rho_fin = random::random_density(d, d, &mut rng);
            let joint = DensityMatrix::bipartite(
                qmath::kron(rho_in.matrix(), &rho_fin.matrix().transpose()),
                d,
                d,
            )
            .unwrap();
            let state = twotime::normalized_from_density(&joint).unwrap();
            let a = random::random_hermitian(d, &mut rng);
            let b = random::random_hermitian(d, &mut rng);
            let lhs = state.eval(&a, &b).unwrap();
            let rhs = analytics::double_weak_value(&a, &b, &rho_in, &rho_fin).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}

#[test]
fn convex_transport_identity_on_random_mixtures() {
    let mut rng = rng(15);
    for _ in 0..10 {
        let rho1 = random::random_bipartite_density(2, 2, &mut rng);
        let rho2 = random::random_bipartite_density(2, 4, &mut rng);
        let p1 = rng.gen_range(0.1..0.9);
        let p2 = 1.0 - p1;
        let mix = DensityMatrix::bipartite(rho1.matrix().scale(p1) + rho2.matrix().scale(p2), 2, 2)
            .unwrap();
        let q =
            twotime::convex_weight_transport(&[(p1, rho1.clone()), (p2, rho2.clone())]).unwrap();
        let s_mix = twotime::normalized_from_density(&mix).unwrap();
        let s1 = twotime::normalized_from_density(&rho1).unwrap();
        let s2 = twotime::normalized_from_density(&rho2).unwrap();
        let a = random::random_matrix(2, &mut rng);
        let b = random::random_matrix(2, &mut rng);
        let lhs = s_mix.eval(&a, &b).unwrap();
        let rhs = s1.eval(&a, &b).unwrap() * q[0] + s2.eval(&a, &b).unwrap() * q[1];
        assert!((lhs - rhs).norm() < 1e-10);
    }
}

#[test]
fn purification_identities_on_random_mixed_states() {
    let mut rng = rng(16);
    for d in [2usize, 3] {
        for _ in 0..5 {
            let rank_in = rng.gen_range(1..=d);
            let rank_fin = rng.gen_range(1..=d);
            let rho_in = random::random_density(d, rank_in, &mut rng);
            let rho_fin = random::random_density(d, rank_fin, &mut rng);
            let a = random::random_hermitian(d, &mut rng);
            let b = random::random_hermitian(d, &mut rng);

            let vaid = purify::vaidman_purification(&rho_in, &rho_fin).unwrap();
            let lifted = qmath::kron(&a, &qmath::identity(d * d * d));
            let purified =
                analytics::pure_weak_value(&lifted, &vaid.psi_in, &vaid.psi_fin).unwrap();
            let direct = analytics::weak_value(&a, &rho_in, &rho_fin).unwrap().value;
            assert!((purified - direct).norm() < 1e-10);
            let mu = analytics::overlap(&rho_in, &rho_fin);
            assert!((vaid.overlap - mu / d as f64).abs() < 1e-12);
            assert!((vaid.psi_fin.norm() - 1.0).abs() < 1e-12);

            let dbl = purify::double_purification(&rho_in, &rho_fin).unwrap();
            let lifted2 = qmath::kron(&qmath::kron(&a, &b), &qmath::identity(d * d));
            let purified2 =
                analytics::pure_weak_value(&lifted2, &dbl.psi_in, &dbl.psi_fin).unwrap();
            let direct2 = analytics::double_weak_value(&a, &b, &rho_in, &rho_fin).unwrap();
            assert!((purified2 - direct2).norm() < 1e-10);
            assert!((dbl.overlap - mu * mu).abs() < 1e-12);
        }
    }
}

#[test]
fn extension_identities_on_random_terms() {
    let mut rng = rng(17);
    for n in [1usize, 2, 3] {
        for _ in 0..5 {
            let d = 2;
            let terms: Vec<_> = (0..n)
                .map(|_| {
                    (
                        random::random_pure(d, &mut rng).scale(rng.gen_range(0.5..1.5)),
                        random::random_pure(d, &mut rng).scale(rng.gen_range(0.5..1.5)),
                    )
                })
                .collect();
            let ext = purify::av_extension(&terms).unwrap();
            let a = random::random_matrix(d, &mut rng);
            let b = random::random_matrix(d, &mut rng);

            // λ(A) = Λ(A ⊗ I_aux) exactly on the raw vectors
            let lifted_a = qmath::kron(&a, &qmath::identity(n));
            let lam_a = ext.functional.eval(&a).unwrap();
            assert!((lam_a - ext.extended.eval(&lifted_a).unwrap()).norm() < 1e-10);

            let lam_i = ext.functional.eval(&qmath::identity(d)).unwrap();
            if lam_i.norm() > 1e-9 {
                let state = ext.state.as_ref().unwrap();
                let id_ext = qmath::identity(d * n);
                let lhs = lam_a / lam_i;
                let rhs = state.eval(&lifted_a, &id_ext).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);

                let lifted_b = qmath::kron(&b, &qmath::identity(n));
                let lam_adj = ext.functional.adjoint();
                let lhs2 = lam_a * lam_adj.eval(&b).unwrap()
                    / (lam_i * lam_adj.eval(&qmath::identity(d)).unwrap());
                let rhs2 = state.eval(&lifted_a, &lifted_b).unwrap();
                assert!((lhs2 - rhs2).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn pure_two_time_matrices_factor_through_their_vector() {
    let mut rng = rng(18);
    for d in [2usize, 3] {
        for _ in 0..10 {
            let l = random::random_matrix(d, &mut rng);
            let lam = TwoTimeVector::new(l).unwrap();
            let state = lam.pure_state();
            let a = random::random_matrix(d, &mut rng);
            let b = random::random_matrix(d, &mut rng);
            let lhs = state.eval(&a, &b).unwrap();
            let rhs = lam.eval(&a).unwrap() * lam.adjoint().eval(&b).unwrap();
            assert!((lhs - rhs).norm() < 1e-11);
        }
    }
}

#[test]
fn pseudo_expectation_matches_two_time_state_for_t2_invariant_states() {
    let mut rng = rng(19);
    for _ in 0..10 {
        // symmetrize under partial transpose and remix toward the identity
        // until positive
        let raw = random::random_bipartite_density(2, 4, &mut rng);
        let pt = qmath::partial_transpose_2(raw.matrix(), 2, 2).unwrap();
        let sym = (raw.matrix() + pt).scale(0.5);
        let min = qmath::min_eigenvalue(&sym).unwrap();
        let mix = if min < 1e-6 {
            (1e-6 - min) / (0.25 - min)
        } else {
            0.0
        };
        let mat = sym.scale(1.0 - mix) + qmath::identity(4).scale(mix * 0.25);
        let rho = DensityMatrix::bipartite(mat, 2, 2).unwrap();
        let state = twotime::normalized_from_density(&rho).unwrap();
        for _ in 0..5 {
            let a = random::random_matrix(2, &mut rng);
            let b = random::random_matrix(2, &mut rng);
            let lhs = twotime::pseudo_expectation(&rho, &a, &b).unwrap();
            let rhs = state.eval(&a, &b).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}

#[test]
fn split_and_random4_estimators_agree_statistically() {
    let mut rng = rng(20);
    let rho_in = random::random_density(2, 2, &mut rng);
    let rho_fin = random::random_density(2, 2, &mut rng);
    let obs = random::random_projective_observable(2, &mut rng);
    let exact = analytics::weak_value(obs.observable(), &rho_in, &rho_fin)
        .unwrap()
        .value;
    let k = 200_000;
    let split =
        estimator::estimate_weak_value(&obs, &rho_in, &rho_fin, k, 0.05, 77, ControlMode::Split)
            .unwrap();
    let random4 =
        estimator::estimate_weak_value(&obs, &rho_in, &rho_fin, k, 0.05, 77, ControlMode::Random4)
            .unwrap();
    let scale = obs.x_max().max(exact.norm());
    assert!((split.estimate - exact).norm() < 0.05 * scale.max(1.0));
    assert!((random4.estimate - exact).norm() < 0.05 * scale.max(1.0));
    assert!(split.epsilon_total.is_some());
    assert!(random4.epsilon_total.is_none());
}
