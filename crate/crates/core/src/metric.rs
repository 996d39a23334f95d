//! Metric specifications: a parsed DSL expression or a built-in family.
//!
//! Everything evaluates generically over [`Scalar`], so the same spec gives
//! point values on `f64` and full Taylor data on jets.

use std::fmt;

use num_traits::Zero;
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::dsl::{parse_metric, DomainError, DslError, MetricExpr};
use crate::linalg;
use crate::scalar::{Real, Scalar};
use crate::tensor::TangentPoint;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("invalid metric JSON: {0}")]
    Json(String),
    #[error("unknown metric family `{0}`")]
    UnknownFamily(String),
    #[error("bad parameters for family `{family}`: {message}")]
    BadParams { family: String, message: String },
    #[error("dimension must be at least 3, got {0}")]
    Dimension(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("F is not 1-homogeneous: at x={x:?}, y={y:?}, lambda={lambda}: relative defect {defect:e}")]
    HomogeneityViolation {
        x: Vec<f64>,
        y: Vec<f64>,
        lambda: f64,
        defect: f64,
    },
}

/// Built-in test metrics.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinFamily {
    Euclidean,
    /// `a_ij = δ_ij / (1 + K|x|²/4)²`, the stereographic model of constant curvature `K`.
    RiemannianConstantCurvature { k: f64 },
    /// `F = sqrt(a_ij(x) y^i y^j) + b_i(x) y^i` with `a_ij(x) = a_ij / σ(x)²`,
    /// `σ = 1 + K|x|²/4` and `b_i(x) = b_i + B_ij x^j`. With `K = 0` and `B = 0`
    /// this is the constant Randers metric.
    Randers {
        a: Vec<f64>,
        b: Vec<f64>,
        curvature: f64,
        b_linear: Vec<f64>,
    },
    /// `F = (Σ (y^i)⁴)^{1/4}`.
    LocallyMinkowskiQuartic,
}

impl BuiltinFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinFamily::Euclidean => "euclidean",
            BuiltinFamily::RiemannianConstantCurvature { .. } => "riemannian_constant_curvature",
            BuiltinFamily::Randers { .. } => "randers",
            BuiltinFamily::LocallyMinkowskiQuartic => "locally_minkowski_quartic",
        }
    }

    /// Constant Randers metric with `a = δ`.
    pub fn randers_constant(b: Vec<f64>) -> Self {
        let n = b.len();
        BuiltinFamily::Randers {
            a: linalg::identity(n),
            b,
            curvature: 0.0,
            b_linear: vec![0.0; n * n],
        }
    }

    fn from_params(name: &str, params: &Value, dim: usize) -> Result<Self, MetricError> {
        let bad = |message: String| MetricError::BadParams {
            family: name.to_string(),
            message,
        };
        let get_f64 = |key: &str, default: f64| -> Result<f64, MetricError> {
            match params.get(key) {
                None => Ok(default),
                Some(v) => v.as_f64().ok_or_else(|| bad(format!("`{key}` must be a number"))),
            }
        };
        let get_vec = |key: &str, len: usize| -> Result<Option<Vec<f64>>, MetricError> {
            let Some(v) = params.get(key) else {
                return Ok(None);
            };
            let flat = flatten_numbers(v).ok_or_else(|| bad(format!("`{key}` must be numeric")))?;
            if flat.len() != len {
                return Err(bad(format!("`{key}` needs {len} entries, got {}", flat.len())));
            }
            Ok(Some(flat))
        };
        let family = match name {
            "euclidean" => BuiltinFamily::Euclidean,
            "riemannian_constant_curvature" => BuiltinFamily::RiemannianConstantCurvature {
                k: get_f64("K", get_f64("k", 1.0)?)?,
            },
            "randers" => BuiltinFamily::Randers {
                a: get_vec("a", dim * dim)?.unwrap_or_else(|| linalg::identity(dim)),
                b: get_vec("b", dim)?.ok_or_else(|| bad("`b` is required".into()))?,
                curvature: get_f64("K", 0.0)?,
                b_linear: get_vec("b_linear", dim * dim)?.unwrap_or_else(|| vec![0.0; dim * dim]),
            },
            "locally_minkowski_quartic" => BuiltinFamily::LocallyMinkowskiQuartic,
            other => return Err(MetricError::UnknownFamily(other.to_string())),
        };
        family.validate(dim)?;
        Ok(family)
    }

    fn validate(&self, dim: usize) -> Result<(), MetricError> {
        if let BuiltinFamily::Randers { a, b, b_linear, .. } = self {
            let bad = |message: &str| MetricError::BadParams {
                family: "randers".into(),
                message: message.into(),
            };
            if a.len() != dim * dim || b.len() != dim || b_linear.len() != dim * dim {
                return Err(bad("parameter sizes do not match the dimension"));
            }
            if linalg::max_abs(&a.iter().zip(linalg::transpose(a, dim)).map(|(p, q)| p - q).collect::<Vec<_>>()) > 1e-12 {
                return Err(bad("`a` must be symmetric"));
            }
            if linalg::cholesky(a, dim).is_none() {
                return Err(bad("`a` must be positive definite"));
            }
            if randers_b_norm_sq(a, b, dim) >= 1.0 {
                return Err(bad("need b^T a^-1 b < 1"));
            }
        }
        Ok(())
    }

    fn energy<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T, DomainError> {
        let n = x.len();
        let dot = |u: &[T], v: &[T]| -> T {
            let mut acc = u[0].clone() * v[0].clone();
            for i in 1..n {
                acc = acc + u[i].clone() * v[i].clone();
            }
            acc
        };
        match self {
            BuiltinFamily::Euclidean => Ok(dot(y, y)),
            BuiltinFamily::RiemannianConstantCurvature { k } => {
                let s = conformal(x, *k, &dot)?;
                Ok(dot(y, y) / (s.clone() * s))
            }
            BuiltinFamily::LocallyMinkowskiQuartic => {
                if y.iter().any(|v| v.value().is_zero()) {
                    return Err(DomainError::Guard(
                        "quartic metric needs every y^i non-zero".into(),
                    ));
                }
                let quartic = y.iter().map(|v| v.powi(4)).reduce(|a, b| a + b).unwrap();
                Ok(quartic.sqrt())
            }
            BuiltinFamily::Randers {
                a,
                b,
                curvature,
                b_linear,
            } => {
                let s = conformal(x, *curvature, &dot)?;
                let mut quad = y[0].zero_like();
                let mut beta = y[0].zero_like();
                for i in 0..n {
                    let mut bi = x[0].lift_f64(b[i]);
                    for j in 0..n {
                        quad = quad + y[i].clone() * y[j].clone() * y[i].lift_f64(a[i * n + j]);
                        if b_linear[i * n + j] != 0.0 {
                            bi = bi + x[j].clone() * x[j].lift_f64(b_linear[i * n + j]);
                        }
                    }
                    beta = beta + bi * y[i].clone();
                }
                let bx: Vec<f64> = (0..n)
                    .map(|i| {
                        b[i] + (0..n)
                            .map(|j| b_linear[i * n + j] * x[j].value().to_f64_lossy())
                            .sum::<f64>()
                    })
                    .collect();
                let sv = s.value().to_f64_lossy();
                if sv * sv * randers_b_norm_sq(a, &bx, n) >= 1.0 {
                    return Err(DomainError::Guard("Randers condition |b|_a < 1 fails".into()));
                }
                let alpha = quad.sqrt() / s;
                let f = alpha + beta;
                Ok(f.clone() * f)
            }
        }
    }
}

fn conformal<T: Scalar>(x: &[T], k: f64, dot: &dyn Fn(&[T], &[T]) -> T) -> Result<T, DomainError> {
    let s = x[0].lift_f64(1.0) + dot(x, x) * x[0].lift_f64(k / 4.0);
    if s.value().to_f64_lossy() <= 0.0 {
        return Err(DomainError::Guard("conformal factor 1 + K|x|^2/4 must be positive".into()));
    }
    Ok(s)
}

fn randers_b_norm_sq(a: &[f64], b: &[f64], n: usize) -> f64 {
    let Some(inv) = linalg::invert(a, n, 1e-14) else {
        return f64::INFINITY;
    };
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| b[i] * inv[i * n + j] * b[j])
        .sum()
}

fn flatten_numbers(v: &Value) -> Option<Vec<f64>> {
    match v {
        Value::Number(x) => Some(vec![x.as_f64()?]),
        Value::Array(items) => {
            let mut out = Vec::new();
            for item in items {
                out.extend(flatten_numbers(item)?);
            }
            Some(out)
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricSource {
    Expr(MetricExpr),
    Family(BuiltinFamily),
}

/// A Finsler function `F(x, y)` in dimension `dim ≥ 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    source: MetricSource,
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    dim: usize,
    metric: RawMetric,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawMetric {
    Dsl {
        dsl: String,
    },
    Family {
        family: String,
        #[serde(default)]
        params: Value,
    },
}

impl MetricSpec {
    pub fn from_expr(expr: MetricExpr) -> Self {
        let dim = expr.dim();
        MetricSpec {
            source: MetricSource::Expr(expr),
            dim,
        }
    }

    pub fn from_dsl(text: &str, dim: usize) -> Result<Self, MetricError> {
        Ok(Self::from_expr(parse_metric(text, dim)?))
    }

    pub fn family(family: BuiltinFamily, dim: usize) -> Result<Self, MetricError> {
        if dim < 3 {
            return Err(MetricError::Dimension(dim));
        }
        family.validate(dim)?;
        Ok(MetricSpec {
            source: MetricSource::Family(family),
            dim,
        })
    }

    /// Parses `{"dim": n, "metric": {"dsl": ...} | {"family": ..., "params": {...}}}`.
    pub fn from_json(text: &str) -> Result<Self, MetricError> {
        let raw: RawSpec =
            serde_json::from_str(text).map_err(|e| MetricError::Json(e.to_string()))?;
        if raw.dim < 3 {
            return Err(MetricError::Dimension(raw.dim));
        }
        match raw.metric {
            RawMetric::Dsl { dsl } => Self::from_dsl(&dsl, raw.dim),
            RawMetric::Family { family, params } => {
                let params = if params.is_null() {
                    Value::Object(Default::default())
                } else {
                    params
                };
                let fam = BuiltinFamily::from_params(&family, &params, raw.dim)?;
                Self::family(fam, raw.dim)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &MetricSource {
        &self.source
    }

    /// Human-readable description of the admissible region.
    pub fn domain_guard(&self) -> &'static str {
        match &self.source {
            MetricSource::Expr(_) => "y != 0 and every sqrt/log/division/power defined",
            MetricSource::Family(BuiltinFamily::Euclidean) => "y != 0",
            MetricSource::Family(BuiltinFamily::RiemannianConstantCurvature { .. }) => {
                "y != 0 and 1 + K|x|^2/4 > 0"
            }
            MetricSource::Family(BuiltinFamily::Randers { .. }) => {
                "y != 0, 1 + K|x|^2/4 > 0 and |b(x)|_a(x) < 1"
            }
            MetricSource::Family(BuiltinFamily::LocallyMinkowskiQuartic) => "every y^i != 0",
        }
    }

    /// The squared Finsler function `F²`, the quantity the engine differentiates.
    pub fn energy<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T, DomainError> {
        check_direction(y)?;
        match &self.source {
            MetricSource::Expr(e) => {
                let f = e.eval(x, y)?;
                Ok(f.clone() * f)
            }
            MetricSource::Family(fam) => fam.energy(x, y),
        }
    }

    /// The Finsler function `F` itself.
    pub fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T, DomainError> {
        check_direction(y)?;
        match &self.source {
            MetricSource::Expr(e) => e.eval(x, y),
            MetricSource::Family(BuiltinFamily::LocallyMinkowskiQuartic) => {
                let e = self.energy(x, y)?;
                Ok(e.sqrt())
            }
            MetricSource::Family(fam) => {
                let e = fam.energy(x, y)?;
                if e.value().is_zero() {
                    return Err(DomainError::SqrtAtZero);
                }
                Ok(e.sqrt())
            }
        }
    }

    pub fn eval_at<S: Real + Scalar<Real = S>>(&self, p: &TangentPoint<S>) -> Result<S, DomainError> {
        self.eval(&p.x, &p.y)
    }
}

fn check_direction<T: Scalar>(y: &[T]) -> Result<(), DomainError> {
    if y.iter().all(|v| v.value().is_zero()) {
        Err(DomainError::ZeroDirection)
    } else {
        Ok(())
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            MetricSource::Expr(e) => write!(f, "F = {e} (n = {})", self.dim),
            MetricSource::Family(fam) => match fam {
                BuiltinFamily::RiemannianConstantCurvature { k } => {
                    write!(f, "{} K={k} (n = {})", fam.name(), self.dim)
                }
                BuiltinFamily::Randers { b, curvature, .. } => {
                    write!(f, "randers b={b:?} K={curvature} (n = {})", self.dim)
                }
                _ => write!(f, "{} (n = {})", fam.name(), self.dim),
            },
        }
    }
}

/// Worst homogeneity defect over a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport {
    pub worst_defect: f64,
    pub worst_point: Option<TangentPoint<f64>>,
    pub worst_lambda: f64,
    pub checked: usize,
}

/// Checks `|F(x, λy) − λF(x, y)| ≤ tol·|λF(x, y)|` on every sample and scale.
pub fn check_homogeneity(
    spec: &MetricSpec,
    samples: &[TangentPoint<f64>],
    lambdas: &[f64],
    tol: f64,
) -> Result<HomogeneityReport, MetricError> {
    let mut report = HomogeneityReport {
        worst_defect: 0.0,
        worst_point: None,
        worst_lambda: 1.0,
        checked: 0,
    };
    for p in samples {
        let f = spec.eval(&p.x, &p.y)?;
        for &lambda in lambdas {
            let scaled: Vec<f64> = p.y.iter().map(|v| v * lambda).collect();
            let fl = spec.eval(&p.x, &scaled)?;
            let defect = (fl - lambda * f).abs() / (lambda * f).abs().max(f64::MIN_POSITIVE);
            report.checked += 1;
            if defect > report.worst_defect || report.worst_point.is_none() {
                report.worst_defect = defect;
                report.worst_point = Some(p.clone());
                report.worst_lambda = lambda;
            }
            if defect > tol {
                return Err(MetricError::HomogeneityViolation {
                    x: p.x.clone(),
                    y: p.y.clone(),
                    lambda,
                    defect,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(x: [f64; 3], y: [f64; 3]) -> TangentPoint<f64> {
        TangentPoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn json_forms() {
        let s = MetricSpec::from_json(r#"{"dim": 3, "metric": {"dsl": "sqrt(y1^2+y2^2+y3^2)"}}"#)
            .unwrap();
        assert_eq!(s.eval(&[0.0; 3], &[3.0, 4.0, 0.0]).unwrap(), 5.0);
        let s = MetricSpec::from_json(
            r#"{"dim": 3, "metric": {"family": "randers", "params": {"b": [0.3, 0, 0]}}}"#,
        )
        .unwrap();
        assert_relative_eq!(s.eval(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap(), 1.3, epsilon = 1e-15);
        assert!(matches!(
            MetricSpec::from_json(r#"{"dim": 2, "metric": {"family": "euclidean"}}"#),
            Err(MetricError::Dimension(2))
        ));
        assert!(matches!(
            MetricSpec::from_json(r#"{"dim": 3, "metric": {"family": "nope"}}"#),
            Err(MetricError::UnknownFamily(_))
        ));
        assert!(matches!(
            MetricSpec::from_json(
                r#"{"dim": 3, "metric": {"family": "randers", "params": {"b": [1.5, 0, 0]}}}"#
            ),
            Err(MetricError::BadParams { .. })
        ));
    }

    #[test]
    fn quartic_value_and_guard() {
        let s = MetricSpec::family(BuiltinFamily::LocallyMinkowskiQuartic, 3).unwrap();
        assert_relative_eq!(
            s.eval(&[0.0; 3], &[1.0, 1.0, 1.0]).unwrap(),
            3f64.powf(0.25),
            epsilon = 1e-15
        );
        assert_relative_eq!(s.eval(&[0.0; 3], &[1.0, 1.0, 1.0]).unwrap(), 1.316074, epsilon = 1e-6);
        assert!(s.eval(&[0.0; 3], &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn zero_direction_rejected() {
        let s = MetricSpec::family(BuiltinFamily::Euclidean, 3).unwrap();
        assert_eq!(s.eval(&[0.0; 3], &[0.0; 3]), Err(DomainError::ZeroDirection));
    }

    #[test]
    fn homogeneity_check() {
        let samples = vec![pt([0.1, -0.2, 0.3], [1.0, 0.5, -0.7]), pt([0.0; 3], [1.0, 0.0, 0.0])];
        let s = MetricSpec::family(BuiltinFamily::randers_constant(vec![0.2, -0.1, 0.3]), 3).unwrap();
        check_homogeneity(&s, &samples, &[0.5, 3.0], 1e-12).unwrap();
        let sq = MetricSpec::from_dsl("y1^2+y2^2+y3^2", 3).unwrap();
        assert!(matches!(
            check_homogeneity(&sq, &samples, &[2.0], 1e-12),
            Err(MetricError::HomogeneityViolation { .. })
        ));
    }
}
