mod common;

use approx::assert_relative_eq;
use common::*;
use finsler_core::cartan::{ConnectionData, EngineError};
use finsler_core::metric::{check_homogeneity, BuiltinFamily, MetricSpec};
use finsler_core::scalar::Scalar;
use finsler_core::tensor::{multi_indices, TangentPoint, TensorError};
use finsler_core::Jet64;
use proptest::prelude::*;

type T = finsler_core::tensor::ComponentTensor<Jet64>;

fn vals(t: &T) -> Vec<f64> {
    t.values().data().to_vec()
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

#[test]
fn euclidean_connection_is_flat() {
    let spec = euclidean(3);
    for p in points(&spec, 1, 5) {
        let conn = ConnectionData::new(&spec, &p).unwrap();
        for (i, j) in [(0, 0), (1, 1), (2, 2), (0, 1)] {
            assert_relative_eq!(conn.g.get(&[i, j]).value(), delta(i, j));
        }
        let (r, rhat) = conn.h_curvature();
        let hv = conn.hv_and_v_curvature();
        for t in [&conn.nonlinear, &conn.coeffs, &conn.cartan, &r, &rhat, &hv.p, &hv.s] {
            assert_eq!(t.values().max_abs(), 0.0);
        }
    }
}

#[test]
fn randers_metric_at_a_reference_point() {
    let spec = MetricSpec::family(BuiltinFamily::randers_constant(vec![0.3, 0.0, 0.0]), 3).unwrap();
    let conn = ConnectionData::new(&spec, &pt(&[0.0; 3], &[1.0, 0.0, 0.0])).unwrap();
    let g = vals(&conn.g);
    let expected = [1.69, 0.0, 0.0, 0.0, 1.3, 0.0, 0.0, 0.0, 1.3];
    for (a, b) in g.iter().zip(expected) {
        assert_relative_eq!(*a, b, epsilon = 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// g_ij = (F/α)(δ_ij − ŷ_i ŷ_j) + (ŷ_i + b_i)(ŷ_j + b_j) for F = |y| + b·y.
    #[test]
    fn randers_metric_matches_closed_form(
        b in prop::collection::vec(-0.5f64..0.5, 3),
        y in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(norm > 0.1);
        let spec = MetricSpec::family(BuiltinFamily::randers_constant(b.clone()), 3).unwrap();
        let conn = ConnectionData::new(&spec, &pt(&[0.1, 0.2, 0.3], &y)).unwrap();
        let yh: Vec<f64> = y.iter().map(|v| v / norm).collect();
        let f_over_alpha = 1.0 + b.iter().zip(&yh).map(|(u, v)| u * v).sum::<f64>();
        for ij in multi_indices(3, 2) {
            let (i, j) = (ij[0], ij[1]);
            let closed = f_over_alpha * (delta(i, j) - yh[i] * yh[j]) + (yh[i] + b[i]) * (yh[j] + b[j]);
            prop_assert!((conn.g.get(&ij).value() - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_is_zero_homogeneous_in_y(lambda in 0.2f64..5.0, seed in 0u64..50) {
        let spec = randers(3);
        let p = points(&spec, seed, 1).remove(0);
        let scaled = TangentPoint::new(p.x.clone(), p.y.iter().map(|v| v * lambda).collect()).unwrap();
        let a = ConnectionData::with_order(&spec, &p, 3).unwrap();
        let b = ConnectionData::with_order(&spec, &scaled, 3).unwrap();
        for (u, v) in vals(&a.g).iter().zip(vals(&b.g)) {
            prop_assert!((u - v).abs() < 1e-12 * u.abs().max(1.0));
        }
        for (u, v) in vals(&a.nonlinear).iter().zip(vals(&b.nonlinear)) {
            prop_assert!((lambda * u - v).abs() < 1e-11 * v.abs().max(1.0));
        }
    }
}

#[test]
fn constant_curvature_matches_closed_forms() {
    for (k, n) in [(1.0, 3), (-0.5, 4)] {
        let spec = constant_curvature(k, n);
        for p in points(&spec, 5, 6) {
            let conn = ConnectionData::new(&spec, &p).unwrap();
            let s = 1.0 + k * p.x.iter().map(|v| v * v).sum::<f64>() / 4.0;
            let dphi: Vec<f64> = p.x.iter().map(|xi| -k * xi / (2.0 * s)).collect();
            let gamma = |i: usize, j: usize, l: usize| {
                delta(i, j) * dphi[l] + delta(i, l) * dphi[j] - delta(j, l) * dphi[i]
            };
            for ijk in multi_indices(n, 3) {
                let (i, j, l) = (ijk[0], ijk[1], ijk[2]);
                assert!((conn.coeffs.get(&ijk).value() - gamma(i, j, l)).abs() < 1e-12);
            }
            for ij in multi_indices(n, 2) {
                let closed: f64 = (0..n).map(|l| gamma(ij[0], ij[1], l) * p.y[l]).sum();
                assert!((conn.nonlinear.get(&ij).value() - closed).abs() < 1e-12);
            }
            assert!(conn.cartan.values().max_abs() < 1e-12);
            let g = |a: usize, b: usize| delta(a, b) / (s * s);
            let (r, _) = conn.h_curvature();
            for iabc in multi_indices(n, 4) {
                let (i, a, b, c) = (iabc[0], iabc[1], iabc[2], iabc[3]);
                let closed = k * (g(a, c) * delta(i, b) - g(b, c) * delta(i, a));
                assert!((r.get(&iabc).value() - closed).abs() < 1e-10, "{iabc:?}");
            }
        }
    }
}

#[test]
fn connection_axioms_on_every_family() {
    for n in [3, 4] {
        for (name, spec) in all_families(n) {
            let count = if n == 3 { 20 } else { 5 };
            for p in points(&spec, 21, count) {
                let conn = ConnectionData::new(&spec, &p).unwrap();
                for (axiom, value, tol) in conn.axiom_residuals().entries() {
                    assert!(value <= tol, "{name} n={n} {axiom}: {value:e} at {p:?}");
                }
            }
        }
    }
}

#[test]
fn homogeneity_of_every_family() {
    for (name, spec) in all_families(3) {
        let samples = points(&spec, 4, 10);
        let report = check_homogeneity(&spec, &samples, &[0.3, 2.0, 7.5], 1e-12).unwrap();
        assert_eq!(report.checked, 30, "{name}");
    }
}

#[test]
fn inadmissible_points_are_errors() {
    let spec = MetricSpec::from_dsl("sqrt(y1^2 + y2^2 - y3^2)", 3).unwrap();
    let err = ConnectionData::<f64>::new(&spec, &pt(&[0.0; 3], &[1.0, 0.0, 0.5])).unwrap_err();
    assert!(matches!(err, EngineError::Tensor(TensorError::NotPositiveDefinite { .. })), "{err:?}");
    let err = ConnectionData::<f64>::new(&spec, &pt(&[0.0; 3], &[0.5, 0.0, 1.0])).unwrap_err();
    assert!(matches!(err, EngineError::Domain(_)), "{err:?}");
    assert!(TangentPoint::new(vec![0.0; 3], vec![0.0; 3]).is_err());
    let err = ConnectionData::<f64>::new(&euclidean(3), &pt(&[0.0; 4], &[1.0; 4])).unwrap_err();
    assert_eq!(err, EngineError::Dimension { got: 4, expected: 3 });
    assert_eq!(
        ConnectionData::<f64>::with_order(&euclidean(3), &pt(&[0.0; 3], &[1.0; 3]), 2).unwrap_err(),
        EngineError::OrderTooLow(2)
    );
}

#[test]
fn single_precision_engine() {
    let spec = constant_curvature(1.0, 3);
    let p = TangentPoint::new(vec![0.1f32, -0.2, 0.05], vec![0.6f32, 0.3, -0.9]).unwrap();
    let conn = ConnectionData::<f32>::new(&spec, &p).unwrap();
    let (r, _) = conn.h_curvature();
    let st = finsler_core::special::SpecialTensors::compute(&r, &conn.g, &conn.g_inv).unwrap();
    assert!((st.scalar.value() - 6.0).abs() < 1e-3);
}
