//! Running the checks over a point set and rendering the result.

use std::collections::BTreeMap;
use std::fmt::Write;

use finsler_core::classify::{ClassVerdict, PointAnalysis, Verdict, CLASS_NAMES};
use finsler_core::fd::{fd_covariant_commutator, relative_error, FdError, MetricOracle};
use finsler_core::metric::{MetricSource, MetricSpec};
use finsler_core::tensor::{ComponentTensor, TangentPoint};
use finsler_core::theorems::{self, TheoremResult, TheoremStatus, THEOREM_NAMES};
use rayon::prelude::*;

use crate::json::Json;
use crate::{Checks, CliError, Format, PointSource, RunConfig, EXIT_ENGINE_BUG, EXIT_OK};

/// Per-point results. Sections not selected by the check set stay empty.
#[derive(Debug, Clone)]
pub struct PointRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tensors: Vec<(&'static str, String, Vec<f64>)>,
    /// `(name, residual, tolerance)`; always computed because violations
    /// decide the exit status.
    pub invariants: Vec<(&'static str, f64, f64)>,
    pub classes: Vec<(&'static str, ClassVerdict)>,
    pub theorems: Vec<(&'static str, TheoremResult)>,
    pub oracle: Option<OracleRecord>,
}

#[derive(Debug, Clone)]
pub enum OracleRecord {
    Errors(Vec<(&'static str, f64)>),
    /// The stencil left the admissible region; not an engine fault.
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Checks,
    pub metadata: Json,
    pub points: Vec<PointRecord>,
    pub fixtures: Vec<(&'static str, TheoremResult)>,
    pub oracle_tol: f64,
    /// Human-readable reasons for an engine-bug exit.
    pub engine_bugs: Vec<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.engine_bugs.is_empty() {
            EXIT_OK
        } else {
            EXIT_ENGINE_BUG
        }
    }

    pub fn class_summary(&self, name: &str) -> ClassSummary {
        let mut s = ClassSummary::default();
        for p in &self.points {
            if let Some((_, v)) = p.classes.iter().find(|(n, _)| *n == name) {
                match v.verdict {
                    Verdict::Pass => s.pass += 1,
                    Verdict::Fail => s.fail += 1,
                    Verdict::Inapplicable => s.inapplicable += 1,
                }
                if v.verdict != Verdict::Inapplicable {
                    s.worst_residual = s.worst_residual.max(v.residual);
                }
                if let (Verdict::Pass, Some(a)) = (v.verdict, v.alpha) {
                    s.alpha_range = Some(s.alpha_range.map_or((a, a), |(lo, hi)| (lo.min(a), hi.max(a))));
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassSummary {
    pub pass: usize,
    pub fail: usize,
    pub inapplicable: usize,
    pub worst_residual: f64,
    pub alpha_range: Option<(f64, f64)>,
}

impl ClassSummary {
    /// Inapplicable points are neutral: one failure fails the class, and a
    /// class with no applicable point is inapplicable.
    pub fn verdict(&self) -> Verdict {
        if self.fail > 0 {
            Verdict::Fail
        } else if self.pass > 0 {
            Verdict::Pass
        } else {
            Verdict::Inapplicable
        }
    }
}

fn values(t: &ComponentTensor<f64>) -> (String, Vec<f64>) {
    (t.variance_code(), t.data().to_vec())
}

fn tensor_block(pa: &PointAnalysis<f64>) -> Vec<(&'static str, String, Vec<f64>)> {
    let st = &pa.special;
    let list: [(&'static str, &ComponentTensor<f64>); 18] = [
        ("g", &pa.g),
        ("g_inv", &pa.g_inv),
        ("spray", &pa.spray),
        ("nonlinear_connection", &pa.nonlinear),
        ("connection_coefficients", &pa.coeffs),
        ("cartan", &pa.cartan),
        ("h_curvature", &pa.r),
        ("vh_torsion", &pa.rhat),
        ("hv_curvature", &pa.p),
        ("v_curvature", &pa.s),
        ("hv_torsion", &pa.phat),
        ("ricci", &st.ric),
        ("ricci_operator", &st.ric_o),
        ("g_tensor", &st.g_tensor),
        ("concircular", &st.concircular),
        ("projective", &st.projective),
        ("m_projective", &st.m_projective),
        ("h_curvature_derivative", &pa.d_r),
    ];
    let mut out: Vec<_> = list
        .into_iter()
        .map(|(name, t)| {
            let (v, d) = values(t);
            (name, v, d)
        })
        .collect();
    out.insert(13, ("scalar_curvature", String::new(), vec![st.scalar]));
    out
}

fn oracle_errors(
    spec: &MetricSpec,
    p: &TangentPoint<f64>,
    pa: &PointAnalysis<f64>,
    cfg: &RunConfig,
) -> Result<Vec<(&'static str, f64)>, FdError> {
    let oracle = MetricOracle::new(spec, cfg.fd);
    let z = p.coords();
    let curv = fd_covariant_commutator(spec, p, &cfg.fd)?;
    Ok(vec![
        ("g", relative_error(&oracle.fundamental_tensor(&z)?, pa.g.data())),
        ("nonlinear_connection", relative_error(&oracle.nonlinear(&z)?, pa.nonlinear.data())),
        ("connection_coefficients", relative_error(&oracle.coefficients(&z)?, pa.coeffs.data())),
        ("cartan", relative_error(&oracle.cartan(&z)?, pa.cartan.data())),
        ("h_curvature", relative_error(curv.r.data(), pa.r.data())),
        ("hv_curvature", relative_error(curv.p.data(), pa.p.data())),
        ("ricci", relative_error(curv.ric.data(), pa.special.ric.data())),
        ("scalar_curvature", relative_error(&[curv.scalar], &[pa.special.scalar])),
    ])
}

fn analyse(spec: &MetricSpec, index: usize, p: &TangentPoint<f64>, cfg: &RunConfig) -> Result<PointRecord, CliError> {
    let pa = PointAnalysis::compute(spec, p).map_err(|e| CliError::Point {
        index,
        message: e.to_string(),
    })?;
    let checks = cfg.checks;
    let invariants = pa.invariants.clone();
    let classes = if checks.classify || checks.theorems {
        pa.classify(&cfg.tolerances)
    } else {
        Vec::new()
    };
    let theorems = if checks.theorems {
        theorems::verify_point(&pa, &classes, &cfg.tolerances)
    } else {
        Vec::new()
    };
    let oracle = checks.oracle.then(|| match oracle_errors(spec, p, &pa, cfg) {
        Ok(errors) => Ok(OracleRecord::Errors(errors)),
        Err(e @ (FdError::Domain(_) | FdError::Singular)) => Ok(OracleRecord::Skipped(e.to_string())),
        Err(e) => Err(CliError::Oracle(e)),
    });
    Ok(PointRecord {
        x: p.x.clone(),
        y: p.y.clone(),
        tensors: if checks.tensors { tensor_block(&pa) } else { Vec::new() },
        invariants,
        classes: if checks.classify { classes } else { Vec::new() },
        theorems,
        oracle: oracle.transpose()?,
    })
}

/// Loads the metric and points, runs the selected checks and assembles the
/// report. Configuration and metric problems are errors; engine faults are
/// recorded in the report and surface through [`Report::exit_code`].
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let (spec, raw_metric) = cfg.load_metric()?;
    let pts = cfg.points.load(&spec)?;
    let metadata = metadata(cfg, &spec, &raw_metric, pts.len());
    let checks = cfg.checks;
    if checks.is_empty() {
        return Ok(Report {
            checks,
            metadata,
            points: Vec::new(),
            fixtures: Vec::new(),
            oracle_tol: cfg.oracle_tol,
            engine_bugs: Vec::new(),
        });
    }
    let points: Vec<PointRecord> = pts
        .par_iter()
        .enumerate()
        .map(|(i, p)| analyse(&spec, i, p, cfg))
        .collect::<Result<_, _>>()?;
    let fixtures = if checks.theorems {
        let seed = match &cfg.points {
            PointSource::Random(s) => s.seed,
            PointSource::File(_) => 0,
        };
        theorems::fixtures::run_all(seed)
    } else {
        Vec::new()
    };

    let mut engine_bugs = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for (name, res, tol) in &p.invariants {
            if !(*res <= *tol) {
                engine_bugs.push(format!("point {i}: invariant {name} residual {res:.3e} exceeds {tol:.0e}"));
            }
        }
        for (name, t) in &p.theorems {
            if t.status == TheoremStatus::Violated {
                engine_bugs.push(format!("point {i}: theorem check {name} violated"));
            }
        }
        if let Some(OracleRecord::Errors(errs)) = &p.oracle {
            for (name, e) in errs {
                if !(*e <= cfg.oracle_tol) {
                    engine_bugs.push(format!("point {i}: oracle disagrees on {name}, relative error {e:.3e}"));
                }
            }
        }
    }
    for (name, t) in &fixtures {
        if t.status == TheoremStatus::Violated {
            engine_bugs.push(format!("fixture {name} violated"));
        }
    }
    Ok(Report {
        checks,
        metadata,
        points,
        fixtures,
        oracle_tol: cfg.oracle_tol,
        engine_bugs,
    })
}

fn from_value(v: &serde_json::Value) -> Json {
    use serde_json::Value;
    match v {
        Value::Null => Json::Null,
        Value::Bool(b) => Json::Bool(*b),
        Value::Number(n) => n.as_i64().map_or_else(|| Json::Num(n.as_f64().unwrap_or(f64::NAN)), Json::Int),
        Value::String(s) => Json::Str(s.clone()),
        Value::Array(items) => Json::Array(items.iter().map(from_value).collect()),
        Value::Object(map) => Json::Object(map.iter().map(|(k, v)| (k.clone(), from_value(v))).collect()),
    }
}

fn metadata(cfg: &RunConfig, spec: &MetricSpec, raw: &serde_json::Value, count: usize) -> Json {
    let kind = match spec.source() {
        MetricSource::Expr(_) => "dsl",
        MetricSource::Family(f) => f.name(),
    };
    let t = &cfg.tolerances;
    Json::object()
        .with("tool", "finslerc report")
        .with(
            "metric",
            Json::object()
                .with("kind", kind)
                .with("dim", spec.dim())
                .with("domain_guard", spec.domain_guard())
                .with("input", from_value(raw)),
        )
        .with(
            "points",
            Json::object().with("source", cfg.points.describe()).with("count", count),
        )
        .with("checks", Json::Array(cfg.checks.names().into_iter().map(Json::from).collect()))
        .with(
            "conventions",
            Json::object()
                .with("variables", "z = (x^1..x^n, y^1..y^n); F^2 is the differentiated quantity")
                .with(
                    "curvature_sign",
                    "R(X,Y)Z = -K(X,Y)Z with K the usual curvature operator; constant curvature k gives R(X,Y)Z = k(g(X,Z)Y - g(Y,Z)X)",
                )
                .with("ricci_trace", "Ric(Y,Z) = trace of X -> R(X,Y)Z")
                .with("ricci_operator", "g(Ric_o X, Y) = Ric(X, Y); r = trace Ric_o")
                .with(
                    "component_layout",
                    "T[i,a,b,c] is component i of T(d_a, d_b)d_c; covariant derivatives put the direction slot first",
                )
                .with("recurrence", "DT = A (x) T; symmetric when DT = 0 and T != 0"),
        )
        .with(
            "tolerances",
            Json::object()
                .with("classify", t.classify)
                .with("cluster", t.cluster)
                .with("form_match", t.form_match)
                .with("einstein", t.einstein)
                .with("coincidence", t.coincidence)
                .with("oracle", cfg.oracle_tol)
                .with("fd_step", cfg.fd.step)
                .with("fd_richardson_levels", cfg.fd.richardson_levels),
        )
        .with(
            "versions",
            Json::object()
                .with("finslerc", env!("CARGO_PKG_VERSION"))
                .with("finsler-core", finsler_core::VERSION),
        )
}

fn verdict_json(v: &ClassVerdict) -> Json {
    let mut j = Json::object().with("verdict", v.verdict.as_str()).with("residual", v.residual);
    if let Some(a) = v.alpha {
        j.insert("alpha", a);
    }
    if let Some(form) = &v.form {
        j.insert("A", Json::nums(form));
    }
    if let Some(s) = v.symmetric {
        j.insert("symmetric", s);
    }
    if let Some(n) = &v.note {
        j.insert("note", n.as_str());
    }
    j
}

fn theorem_json(t: &TheoremResult) -> Json {
    let detail = Json::Object(t.detail.iter().map(|(k, v)| (k.clone(), Json::Num(*v))).collect());
    let mut j = Json::object().with("status", t.status.as_str()).with("detail", detail);
    if let Some(n) = &t.note {
        j.insert("note", n.as_str());
    }
    j
}

fn point_json(index: usize, p: &PointRecord, checks: Checks) -> Json {
    let mut j = Json::object().with("index", index).with("x", Json::nums(&p.x)).with("y", Json::nums(&p.y));
    if checks.tensors {
        let t = p
            .tensors
            .iter()
            .map(|(name, var, data)| {
                let body = Json::object().with("variance", var.as_str()).with("components", Json::nums(data));
                (name.to_string(), body)
            })
            .collect();
        j.insert("tensors", Json::Object(t));
    }
    if checks.axioms {
        let inv = p.invariants.iter().map(|(n, r, _)| (n.to_string(), Json::Num(*r))).collect();
        j.insert("invariants", Json::Object(inv));
    }
    if checks.classify {
        let c = p.classes.iter().map(|(n, v)| (n.to_string(), verdict_json(v))).collect();
        j.insert("classes", Json::Object(c));
    }
    if checks.theorems {
        let t = p.theorems.iter().map(|(n, r)| (n.to_string(), theorem_json(r))).collect();
        j.insert("theorems", Json::Object(t));
    }
    match &p.oracle {
        Some(OracleRecord::Errors(errs)) => {
            let e = errs.iter().map(|(n, v)| (n.to_string(), Json::Num(*v))).collect();
            j.insert("oracle", Json::object().with("relative_error", Json::Object(e)));
        }
        Some(OracleRecord::Skipped(why)) => j.insert("oracle", Json::object().with("skipped", why.as_str())),
        None => {}
    }
    j
}

/// Worst residual per invariant name, in first-seen order.
fn worst_invariants(points: &[PointRecord]) -> Vec<(&'static str, f64, f64)> {
    let mut out: Vec<(&'static str, f64, f64)> = Vec::new();
    for p in points {
        for (name, r, tol) in &p.invariants {
            match out.iter_mut().find(|(n, _, _)| n == name) {
                Some(e) => e.1 = e.1.max(*r),
                None => out.push((name, *r, *tol)),
            }
        }
    }
    out
}

fn worst_oracle(points: &[PointRecord]) -> (Vec<(&'static str, f64)>, usize) {
    let mut worst: Vec<(&'static str, f64)> = Vec::new();
    let mut skipped = 0;
    for p in points {
        match &p.oracle {
            Some(OracleRecord::Errors(errs)) => {
                for (name, e) in errs {
                    match worst.iter_mut().find(|(n, _)| n == name) {
                        Some(w) => w.1 = w.1.max(*e),
                        None => worst.push((name, *e)),
                    }
                }
            }
            Some(OracleRecord::Skipped(_)) => skipped += 1,
            None => {}
        }
    }
    (worst, skipped)
}

fn theorem_counts(points: &[PointRecord]) -> BTreeMap<&'static str, [usize; 3]> {
    let mut out = BTreeMap::new();
    for p in points {
        for (name, t) in &p.theorems {
            let c: &mut [usize; 3] = out.entry(*name).or_default();
            c[match t.status {
                TheoremStatus::Holds => 0,
                TheoremStatus::Vacuous => 1,
                TheoremStatus::Violated => 2,
            }] += 1;
        }
    }
    out
}

fn aggregate_json(r: &Report) -> Json {
    let mut j = Json::object()
        .with("points", r.points.len())
        .with("exit_code", r.exit_code())
        .with("engine_bug", !r.engine_bugs.is_empty())
        .with("engine_bugs", Json::Array(r.engine_bugs.iter().map(|s| Json::from(s.as_str())).collect()));
    if r.checks.axioms {
        let inv = worst_invariants(&r.points)
            .into_iter()
            .map(|(n, w, tol)| {
                let body = Json::object().with("worst_residual", w).with("tol", tol).with("ok", w <= tol);
                (n.to_string(), body)
            })
            .collect();
        j.insert("invariants", Json::Object(inv));
    }
    if r.checks.classify {
        let classes = CLASS_NAMES
            .iter()
            .map(|name| {
                let s = r.class_summary(name);
                let mut body = Json::object()
                    .with("verdict", s.verdict().as_str())
                    .with("pass", s.pass)
                    .with("fail", s.fail)
                    .with("inapplicable", s.inapplicable)
                    .with("worst_residual", s.worst_residual);
                if let Some((lo, hi)) = s.alpha_range {
                    body.insert("alpha_min", lo);
                    body.insert("alpha_max", hi);
                }
                (name.to_string(), body)
            })
            .collect();
        j.insert("classes", Json::Object(classes));
    }
    if r.checks.theorems {
        let counts = theorem_counts(&r.points);
        let th = THEOREM_NAMES
            .iter()
            .map(|name| {
                let c = counts.get(name).copied().unwrap_or_default();
                let body = Json::object().with("holds", c[0]).with("vacuous", c[1]).with("violated", c[2]);
                (name.to_string(), body)
            })
            .collect();
        j.insert("theorems", Json::Object(th));
        let fx = r.fixtures.iter().map(|(n, t)| (n.to_string(), theorem_json(t))).collect();
        j.insert("fixtures", Json::Object(fx));
    }
    if r.checks.oracle {
        let (worst, skipped) = worst_oracle(&r.points);
        let w = worst.into_iter().map(|(n, e)| (n.to_string(), Json::Num(e))).collect();
        j.insert(
            "oracle",
            Json::object()
                .with("tol", r.oracle_tol)
                .with("skipped_points", skipped)
                .with("worst_relative_error", Json::Object(w)),
        );
    }
    j
}

pub fn report_json(r: &Report) -> Json {
    let points = r.points.iter().enumerate().map(|(i, p)| point_json(i, p, r.checks)).collect();
    let aggregate = if r.checks.is_empty() {
        Json::object()
    } else {
        aggregate_json(r)
    };
    Json::object()
        .with("metadata", r.metadata.clone())
        .with("points", Json::Array(points))
        .with("aggregate", aggregate)
}

fn text_report(r: &Report) -> String {
    let mut s = String::new();
    let meta = &r.metadata;
    let metric = meta.get("metric");
    let field = |j: Option<&Json>, k: &str| match j.and_then(|j| j.get(k)) {
        Some(Json::Str(v)) => v.clone(),
        Some(Json::Int(v)) => v.to_string(),
        _ => String::from("?"),
    };
    let _ = writeln!(s, "metric   {} (dim {})", field(metric, "kind"), field(metric, "dim"));
    let _ = writeln!(s, "points   {} [{}]", r.points.len(), field(meta.get("points"), "source"));
    let _ = writeln!(s, "checks   {}", r.checks.names().join(","));
    let status = if r.engine_bugs.is_empty() { "OK" } else { "ENGINE BUG" };
    let _ = writeln!(s, "status   {status} (exit {})", r.exit_code());
    for bug in &r.engine_bugs {
        let _ = writeln!(s, "  ! {bug}");
    }
    if r.checks.axioms {
        let _ = writeln!(s, "\n{:<40} {:>14} {:>8}  ok", "invariant", "worst", "tol");
        for (n, w, tol) in worst_invariants(&r.points) {
            let ok = if w <= tol { "yes" } else { "NO" };
            let _ = writeln!(s, "{n:<40} {w:>14.3e} {tol:>8.0e}  {ok}");
        }
    }
    if r.checks.classify {
        let _ = writeln!(
            s,
            "\n{:<26} {:<13} {:>5} {:>5} {:>5} {:>14}  alpha",
            "class", "verdict", "pass", "fail", "n/a", "worst"
        );
        for name in CLASS_NAMES {
            let c = r.class_summary(name);
            let alpha = match c.alpha_range {
                Some((lo, hi)) if (hi - lo).abs() <= 1e-12 * hi.abs().max(1.0) => format!("{lo:.10}"),
                Some((lo, hi)) => format!("[{lo:.6}, {hi:.6}]"),
                None => String::new(),
            };
            let _ = writeln!(
                s,
                "{name:<26} {:<13} {:>5} {:>5} {:>5} {:>14.3e}  {alpha}",
                c.verdict().as_str(),
                c.pass,
                c.fail,
                c.inapplicable,
                c.worst_residual
            );
        }
    }
    if r.checks.theorems {
        let counts = theorem_counts(&r.points);
        let _ = writeln!(s, "\n{:<36} {:>6} {:>8} {:>9}", "theorem check", "holds", "vacuous", "violated");
        for name in THEOREM_NAMES {
            let c = counts.get(name).copied().unwrap_or_default();
            let _ = writeln!(s, "{name:<36} {:>6} {:>8} {:>9}", c[0], c[1], c[2]);
        }
        let _ = writeln!(s, "\n{:<36} status", "fixture");
        for (name, t) in &r.fixtures {
            let _ = writeln!(s, "{name:<36} {}", t.status.as_str());
        }
    }
    if r.checks.oracle {
        let (worst, skipped) = worst_oracle(&r.points);
        let _ = writeln!(s, "\n{:<26} {:>14}  (tol {:.0e}, {skipped} skipped)", "oracle", "worst rel err", r.oracle_tol);
        for (n, e) in worst {
            let _ = writeln!(s, "{n:<26} {e:>14.3e}");
        }
    }
    s
}

/// Serializes the report.
pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report_json(report).to_pretty(),
        Format::Text => text_report(report),
    }
}
