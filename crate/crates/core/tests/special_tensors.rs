mod common;

use common::*;
use finsler_core::cartan::ConnectionData;
use finsler_core::classify::PointAnalysis;
use finsler_core::special::{self, SpecialTensors};
use finsler_core::tensor::{max_abs_diff, Symmetry};

fn rel(v: f64, scale: f64) -> f64 {
    v / scale.max(1.0)
}

#[test]
fn m_projective_properties_on_randers() {
    for (n, count) in [(3, 10), (4, 3)] {
        let spec = randers(n);
        for p in points(&spec, 31, count) {
            let conn = ConnectionData::new(&spec, &p).unwrap();
            let (r, rhat) = conn.h_curvature();
            let hv = conn.hv_and_v_curvature();
            let st = SpecialTensors::compute(&r, &conn.g, &conn.g_inv).unwrap();
            let sv = st.values();
            let (g, g_inv) = (conn.g.values(), conn.g_inv.values());
            let h = &sv.m_projective;
            let hl = special::lowered(h, &g, &g_inv).unwrap();
            let scale = hl.max_abs();
            assert!(rel(hl.symmetry_defect(Symmetry::Antisymmetric(0, 1)), scale) <= 1e-9);
            assert!(rel(hl.symmetry_defect(Symmetry::Antisymmetric(2, 3)), scale) <= 1e-9);

            let first = special::m_projective_first_identity_defect(
                h,
                &conn.cartan.values(),
                &rhat.values(),
                &sv.ric,
                &sv.ric_o,
                &g,
            );
            assert!(rel(first.max_abs(), h.max_abs()) <= 1e-8);

            let dh = conn.h_covariant_derivative(&st.m_projective).values();
            let second = special::m_projective_second_identity_defect(
                &dh,
                &hv.p.values(),
                &rhat.values(),
                &conn.h_covariant_derivative(&st.ric).values(),
                &conn.h_covariant_derivative(&st.ric_o).values(),
                &g,
            );
            assert!(rel(second.max_abs(), dh.max_abs()) <= 1e-7);

            let e = conn.v_eta_derivative(&st.m_projective).values();
            assert!(rel(e.max_abs(), h.max_abs()) <= 1e-9);
        }
    }
}

#[test]
fn curvature_cross_checks_on_randers() {
    let spec = randers(3);
    for p in points(&spec, 8, 5) {
        let conn = ConnectionData::new(&spec, &p).unwrap();
        let hv = conn.hv_and_v_curvature();
        assert!(max_abs_diff(&hv.phat.values(), &conn.phat_direct().values()) < 1e-12);
        assert!(max_abs_diff(&hv.s.values(), &conn.s_algebraic().values()) < 1e-12);
        assert!(hv.shat.values().max_abs() < 1e-12);
    }
}

#[test]
fn randers_ricci_tensor_need_not_be_symmetric() {
    let spec = randers(3);
    let p = points(&spec, 8, 1).remove(0);
    let pa = PointAnalysis::compute(&spec, &p).unwrap();
    assert!(pa.special.ric.symmetry_defect(Symmetry::Symmetric(0, 1)) > 1e-3);
    assert!(pa.violations().is_empty(), "{:?}", pa.violations());
}

#[test]
fn constant_curvature_special_tensors() {
    for (k, n) in [(1.0, 3), (-0.5, 4)] {
        let spec = constant_curvature(k, n);
        for p in points(&spec, 9, 10) {
            let conn = ConnectionData::new(&spec, &p).unwrap();
            let (r, _) = conn.h_curvature();
            let st = SpecialTensors::compute(&r, &conn.g, &conn.g_inv).unwrap().values();
            let g = conn.g.values();
            let expected_ric = g.scale(k * (n as f64 - 1.0));
            assert!(max_abs_diff(&st.ric, &expected_ric) <= 1e-8);
            assert!((st.scalar - k * (n * (n - 1)) as f64).abs() <= 1e-7);
            assert!(st.concircular.max_abs() <= 1e-8);
            assert!(st.projective.max_abs() <= 1e-8);
            assert!(st.m_projective.max_abs() <= 1e-8);
            let dr = conn.h_covariant_derivative(&r).values();
            assert!(dr.max_abs() <= 1e-8);
            assert!(max_abs_diff(&st.g_tensor.scale(k), &r.values()) <= 1e-10);
        }
    }
}
