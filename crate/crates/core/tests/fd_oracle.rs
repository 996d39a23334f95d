mod common;

use common::*;
use finsler_core::cartan::ConnectionData;
use finsler_core::fd::{fd_covariant_commutator, fd_partial, relative_error, FDConfig, FdError, MetricOracle};
use finsler_core::scalar::Scalar;
use finsler_core::special::ricci_and_scalar;

#[test]
fn second_y_derivative_of_euclidean_energy() {
    let spec = euclidean(3);
    let oracle = MetricOracle::new(&spec, FDConfig::default());
    let z = [0.1, 0.2, -0.3, 0.4, -0.5, 0.6];
    let (v, _) = fd_partial(&|zz: &[f64]| oracle.energy(zz), &z, &[0, 0, 0, 2, 0, 0], &FDConfig::default()).unwrap();
    assert!((v - 2.0).abs() < 1e-9, "{v}");
}

#[test]
fn quartic_is_x_independent() {
    let spec = quartic(3);
    let oracle = MetricOracle::new(&spec, FDConfig::default());
    let z = [0.1, 0.2, -0.3, 0.4, -0.5, 0.6];
    let (v, _) = fd_partial(&|zz: &[f64]| oracle.energy(zz).map(f64::sqrt), &z, &[1, 0, 0, 0, 0, 0], &FDConfig::default()).unwrap();
    assert!(v.abs() < 1e-12, "{v}");
}

#[test]
fn halving_the_step_quarters_the_raw_error() {
    let f = |z: &[f64]| -> Result<f64, FdError> { Ok(z[0].sin() * (2.0 * z[1]).exp()) };
    let (x, y) = (0.7f64, -0.3f64);
    let e = (2.0 * y).exp();
    let cases = [
        ([2usize, 0], -x.sin() * e),
        ([1, 1], 2.0 * x.cos() * e),
        ([3, 1], -2.0 * x.cos() * e),
        ([2, 2], -4.0 * x.sin() * e),
    ];
    for (counts, exact) in cases {
        let e1 = (fd_partial(&f, &[x, y], &counts, &FDConfig::new(1e-2, 0).unwrap()).unwrap().0 - exact).abs();
        let e2 = (fd_partial(&f, &[x, y], &counts, &FDConfig::new(5e-3, 0).unwrap()).unwrap().0 - exact).abs();
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "{counts:?}: ratio {ratio}");
    }
}

#[test]
fn order_and_step_limits() {
    assert_eq!(FDConfig::new(0.1, 1), Err(FdError::BadStep(0.1)));
    assert!(FDConfig::new(0.0, 1).is_err());
    let f = |_: &[f64]| -> Result<f64, FdError> { Ok(0.0) };
    assert_eq!(fd_partial(&f, &[0.0], &[5], &FDConfig::default()), Err(FdError::OrderTooHigh(5)));
}

#[test]
fn stencil_outside_domain_is_an_error() {
    let spec = finsler_core::metric::MetricSpec::from_dsl("sqrt(y1^2 + y2^2 + y3^2) * sqrt(x1)", 3).unwrap();
    let oracle = MetricOracle::new(&spec, FDConfig::default());
    let err = oracle.spray(&[1e-4, 0.0, 0.0, 1.0, 0.5, 0.2]);
    assert!(matches!(err, Err(FdError::Domain(_))), "{err:?}");
}

#[test]
fn jet_engine_matches_oracle_on_randers() {
    let cfg = FDConfig::default();
    for n in [3, 4] {
        let spec = randers(n);
        let oracle = MetricOracle::new(&spec, cfg);
        let count = if n == 3 { 20 } else { 4 };
        for p in points(&spec, 11, count) {
            let z = p.coords();
            let conn = ConnectionData::new(&spec, &p).unwrap();
            let vals = |t: &finsler_core::tensor::ComponentTensor<finsler_core::Jet64>| t.values().data().to_vec();
            let checks = [
                ("g", oracle.fundamental_tensor(&z).unwrap(), vals(&conn.g)),
                ("N", oracle.nonlinear(&z).unwrap(), vals(&conn.nonlinear)),
                ("F", oracle.coefficients(&z).unwrap(), vals(&conn.coeffs)),
                ("C", oracle.cartan(&z).unwrap(), vals(&conn.cartan)),
            ];
            for (name, fd, jet) in checks {
                let e = relative_error(&fd, &jet);
                assert!(e <= 1e-5, "{name} at {p:?}: {e:e}");
            }
            let fdc = fd_covariant_commutator(&spec, &p, &cfg).unwrap();
            let (r, _) = conn.h_curvature();
            let (ric, _, scalar) = ricci_and_scalar(&r, &conn.g, &conn.g_inv).unwrap();
            let hv = conn.hv_and_v_curvature();
            assert!(relative_error(fdc.r.data(), r.values().data()) <= 1e-5);
            assert!(relative_error(fdc.p.data(), hv.p.values().data()) <= 1e-5);
            assert!(relative_error(fdc.ric.data(), ric.values().data()) <= 1e-5);
            assert!((fdc.scalar - scalar.value()).abs() <= 1e-5 * scalar.value().abs().max(1.0));
        }
    }
}

#[test]
fn commutator_oracle_on_closed_forms() {
    let cfg = FDConfig::default();
    let spec = euclidean(3);
    for p in points(&spec, 2, 3) {
        let fdc = fd_covariant_commutator(&spec, &p, &cfg).unwrap();
        assert!(fdc.r.max_abs() < 1e-9);
    }
    let k = 1.0;
    let spec = constant_curvature(k, 3);
    for p in points(&spec, 3, 5) {
        let fdc = fd_covariant_commutator(&spec, &p, &cfg).unwrap();
        let s = 1.0 + k * p.x.iter().map(|v| v * v).sum::<f64>() / 4.0;
        let g = |a: usize, b: usize| if a == b { 1.0 / (s * s) } else { 0.0 };
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let closed: Vec<f64> = finsler_core::tensor::multi_indices(3, 4)
            .map(|i| k * (g(i[1], i[3]) * d(i[0], i[2]) - g(i[2], i[3]) * d(i[0], i[1])))
            .collect();
        assert!(relative_error(fdc.r.data(), &closed) <= 1e-4);
        assert!(fdc.p.max_abs() < 1e-6);
    }
}
