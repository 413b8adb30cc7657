//! Property tests for the algebraic layer.

use cswap_core::qmath::{self, CMatrix};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn square_matrix(d: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex_entry(), d * d)
        .prop_map(move |entries| CMatrix::from_row_slice(d, d, &entries))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_dimensions_and_entries(a in square_matrix(2), b in square_matrix(3)) {
        let k = qmath::kron(&a, &b);
        prop_assert_eq!(k.nrows(), 6);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..3 {
                    for q in 0..3 {
                        let got = k[(i * 3 + p, j * 3 + q)];
                        let want = a[(i, j)] * b[(p, q)];
                        prop_assert!((got - want).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_transpose_involution_and_trace(m in square_matrix(6)) {
        let pt = qmath::partial_transpose_2(&m, 2, 3).unwrap();
        let back = qmath::partial_transpose_2(&pt, 2, 3).unwrap();
        prop_assert!(qmath::approx_eq(&back, &m, 0.0));
        prop_assert!((pt.trace() - m.trace()).norm() < 1e-13);
    }

    #[test]
    fn partial_transpose_preserves_hermiticity(m in square_matrix(4)) {
        let herm = (&m + m.adjoint()).scale(0.5);
        let pt = qmath::partial_transpose_2(&herm, 2, 2).unwrap();
        prop_assert!(qmath::hermiticity_deviation(&pt) < 1e-13);
    }

    #[test]
    fn double_ket_is_linear(a in square_matrix(3), b in square_matrix(3), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let alpha = Complex64::new(re, im);
        let lhs = qmath::double_ket(&(a.clone() * alpha + &b)).unwrap();
        let rhs = qmath::double_ket(&a).unwrap() * alpha + qmath::double_ket(&b).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn double_ket_round_trips(a in square_matrix(4)) {
        let v = qmath::double_ket(&a).unwrap();
        let back = qmath::double_ket_inverse(&v).unwrap();
        prop_assert!(qmath::approx_eq(&back, &a, 0.0));
    }

    #[test]
    fn swap_conjugation_exchanges_factors(a in square_matrix(2), b in square_matrix(2)) {
        let swap = qmath::swap_operator(2);
        let lhs = &swap * qmath::kron(&a, &b) * &swap;
        let rhs = qmath::kron(&b, &a);
        prop_assert!(qmath::approx_eq(&lhs, &rhs, 1e-13));
    }
}
