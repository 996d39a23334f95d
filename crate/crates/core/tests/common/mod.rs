#![allow(dead_code)]

use finsler_core::metric::{BuiltinFamily, MetricSpec};
use finsler_core::sample::Sampler;
use finsler_core::tensor::TangentPoint;

/// Randers metric on a curved background with a non-closed `b(x)`, so that
/// neither the Ricci tensor nor the curvature has any special structure.
pub fn randers(n: usize) -> MetricSpec {
    let mut a = vec![0.0; n * n];
    let mut bl = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = 1.0 + 0.1 * i as f64;
        if i + 1 < n {
            a[i * n + i + 1] = 0.1;
            a[(i + 1) * n + i] = 0.1;
            bl[i * n + i + 1] = 0.3;
            bl[(i + 1) * n + i] = -0.2;
        }
    }
    bl[n - 1] = 0.15;
    let b = (0..n).map(|i| 0.2 - 0.1 * i as f64).collect();
    MetricSpec::family(
        BuiltinFamily::Randers {
            a,
            b,
            curvature: 0.6,
            b_linear: bl,
        },
        n,
    )
    .unwrap()
}

pub fn constant_curvature(k: f64, n: usize) -> MetricSpec {
    MetricSpec::family(BuiltinFamily::RiemannianConstantCurvature { k }, n).unwrap()
}

pub fn euclidean(n: usize) -> MetricSpec {
    MetricSpec::family(BuiltinFamily::Euclidean, n).unwrap()
}

pub fn quartic(n: usize) -> MetricSpec {
    MetricSpec::family(BuiltinFamily::LocallyMinkowskiQuartic, n).unwrap()
}

pub fn all_families(n: usize) -> Vec<(&'static str, MetricSpec)> {
    vec![
        ("euclidean", euclidean(n)),
        ("constant_curvature", constant_curvature(1.0, n)),
        ("randers", randers(n)),
        ("quartic", quartic(n)),
    ]
}

pub fn points(spec: &MetricSpec, seed: u64, count: usize) -> Vec<TangentPoint<f64>> {
    Sampler::new(seed, count).sample(spec).unwrap()
}

pub fn pt(x: &[f64], y: &[f64]) -> TangentPoint<f64> {
    TangentPoint::new(x.to_vec(), y.to_vec()).unwrap()
}
