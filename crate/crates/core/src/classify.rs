//! Per-point analysis and membership tests for the special Finsler classes.
//!
//! Verdicts are tri-state: `Inapplicable` is returned exactly when a standing
//! hypothesis of the class (non-zero Ricci tensor, non-zero tensor) fails.

use num_traits::Float;

use crate::cartan::{contract_last_with_eta, ConnectionData, EngineError};
use crate::jet::Jet;
use crate::metric::MetricSpec;
use crate::scalar::{Real, Scalar};
use crate::special::{self, SpecialTensors};
use crate::tensor::{
    multi_indices, rank1_fit, ComponentTensor, FitError, Frame, Symmetry, TangentPoint, Variance,
};

/// Tolerances used by classification and the theorem suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for class membership and rank-1 fits.
    pub classify: f64,
    /// Eigenvalue cluster radius factor (times `max(1, |α|)`).
    pub cluster: f64,
    /// Componentwise match of two recurrence forms (times `max(1, |A|)`).
    pub form_match: f64,
    /// Relative defect below which `Ric = (r/n) g` is considered to hold.
    pub einstein: f64,
    /// Tolerance for the tensor coincidence `C = ℙ = ℍ`.
    pub coincidence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            classify: 1e-7,
            cluster: 1e-6,
            form_match: 1e-7,
            einstein: 1e-8,
            coincidence: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inapplicable => "inapplicable",
        }
    }
}

/// Outcome of one class test at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassVerdict {
    pub verdict: Verdict,
    pub residual: f64,
    pub alpha: Option<f64>,
    pub form: Option<Vec<f64>>,
    pub symmetric: Option<bool>,
    pub note: Option<String>,
}

impl ClassVerdict {
    fn new(verdict: Verdict, residual: f64) -> Self {
        ClassVerdict {
            verdict,
            residual,
            alpha: None,
            form: None,
            symmetric: None,
            note: None,
        }
    }

    fn inapplicable(note: &str) -> Self {
        ClassVerdict {
            note: Some(note.to_string()),
            ..Self::new(Verdict::Inapplicable, 0.0)
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Class names in report order.
pub const CLASS_NAMES: [&str; 9] = [
    "horizontally_integrable",
    "generalized_ricci",
    "ricci_finsler",
    "semi_isotropic",
    "recurrent",
    "ricci_recurrent",
    "concircularly_recurrent",
    "projectively_recurrent",
    "m_projectively_recurrent",
];

/// All tensors at one point, as plain values.
#[derive(Debug, Clone)]
pub struct PointAnalysis<S: Real> {
    pub point: TangentPoint<S>,
    pub g: ComponentTensor<S>,
    pub g_inv: ComponentTensor<S>,
    pub frame: Frame<S>,
    pub spray: ComponentTensor<S>,
    pub nonlinear: ComponentTensor<S>,
    pub coeffs: ComponentTensor<S>,
    pub cartan: ComponentTensor<S>,
    pub r: ComponentTensor<S>,
    pub rhat: ComponentTensor<S>,
    pub p: ComponentTensor<S>,
    pub s: ComponentTensor<S>,
    pub phat: ComponentTensor<S>,
    pub special: SpecialTensors<S>,
    /// `∇ʰ` of R, Ric, Ric_o, C, ℙ, ℍ and r, derivative slot first.
    pub d_r: ComponentTensor<S>,
    pub d_ric: ComponentTensor<S>,
    pub d_ric_o: ComponentTensor<S>,
    pub d_concircular: ComponentTensor<S>,
    pub d_projective: ComponentTensor<S>,
    pub d_m_projective: ComponentTensor<S>,
    pub d_scalar: Vec<S>,
    /// `(name, relative residual, tolerance)` for every structural identity.
    pub invariants: Vec<(&'static str, S, f64)>,
}

fn rel<S: Real>(defect: S, scale: S) -> S {
    defect / Float::max(S::one(), scale)
}

impl<S: Real + Scalar<Real = S>> PointAnalysis<S> {
    pub fn compute(spec: &MetricSpec, p: &TangentPoint<S>) -> Result<Self, EngineError> {
        let conn = ConnectionData::new(spec, p)?;
        Self::from_connection(&conn)
    }

    pub fn from_connection(conn: &ConnectionData<S>) -> Result<Self, EngineError> {
        let n = conn.dim();
        let (r_j, rhat_j) = conn.h_curvature();
        let hv = conn.hv_and_v_curvature();
        let st_j = SpecialTensors::compute(&r_j, &conn.g, &conn.g_inv)?;
        let scalar_t = ComponentTensor::new(n, vec![], vec![st_j.scalar.clone()]);
        let dv = |t: &ComponentTensor<Jet<S>>| conn.h_covariant_derivative(t).values();

        let g = conn.g.values();
        let g_inv = conn.g_inv.values();
        let frame = Frame::orthonormal(&g)?;
        let special = st_j.values();
        let r = r_j.values();
        let rhat = rhat_j.values();
        let p = hv.p.values();
        let s = hv.s.values();
        let phat = hv.phat.values();
        let cartan = conn.cartan.values();

        let mut invariants: Vec<(&'static str, S, f64)> = conn.axiom_residuals().entries();
        let r_scale = r.max_abs();
        let eta = conn.eta().values();
        let rhat_from_r = contract_last_with_eta(&r, &eta);
        invariants.push((
            "rhat_is_r_eta",
            rel(rhat_from_r.sub(&rhat)?.max_abs(), r_scale),
            1e-9,
        ));
        invariants.push((
            "h_curvature_antisymmetry",
            rel(r.symmetry_defect(Symmetry::Antisymmetric(1, 2)), r_scale),
            1e-10,
        ));
        let s_low = special::lowered(&s, &g, &g_inv)?;
        let s_scale = s_low.max_abs();
        invariants.push((
            "v_curvature_antisymmetry",
            rel(
                Float::max(
                    s_low.symmetry_defect(Symmetry::Antisymmetric(0, 1)),
                    s_low.symmetry_defect(Symmetry::Antisymmetric(2, 3)),
                ),
                s_scale,
            ),
            1e-10,
        ));
        invariants.push(("v_curvature_eta", rel(hv.shat.values().max_abs(), s_scale), 1e-10));
        invariants.push((
            "v_curvature_two_ways",
            rel(s.sub(&conn.s_algebraic().values())?.max_abs(), s_scale),
            1e-10,
        ));
        invariants.push((
            "phat_two_ways",
            rel(phat.sub(&conn.phat_direct().values())?.max_abs(), phat.max_abs()),
            1e-8,
        ));
        let ric_scale = special.ric.max_abs();
        let back = special.ric_o.raise_lower(0, &g, &g_inv)?.permute(&[1, 0]);
        invariants.push((
            "ricci_operator_definition",
            rel(back.sub(&special.ric)?.max_abs(), ric_scale),
            1e-10,
        ));
        for (name, t) in [
            ("concircular_antisymmetry", &special.concircular),
            ("projective_antisymmetry", &special.projective),
            ("m_projective_antisymmetry", &special.m_projective),
        ] {
            invariants.push((name, rel(t.symmetry_defect(Symmetry::Antisymmetric(1, 2)), t.max_abs()), 1e-9));
        }
        let h_low = special::lowered(&special.m_projective, &g, &g_inv)?;
        invariants.push((
            "m_projective_second_pair_antisymmetry",
            rel(h_low.symmetry_defect(Symmetry::Antisymmetric(2, 3)), h_low.max_abs()),
            1e-9,
        ));
        let first = special::m_projective_first_identity_defect(
            &special.m_projective,
            &cartan,
            &rhat,
            &special.ric,
            &special.ric_o,
            &g,
        );
        invariants.push((
            "m_projective_first_bianchi",
            rel(first.max_abs(), special.m_projective.max_abs()),
            1e-8,
        ));

        let d_r = dv(&r_j);
        let d_ric = dv(&st_j.ric);
        let d_ric_o = dv(&st_j.ric_o);
        let d_concircular = dv(&st_j.concircular);
        let d_projective = dv(&st_j.projective);
        let d_m_projective = dv(&st_j.m_projective);
        let d_scalar = dv(&scalar_t).data().to_vec();
        let second =
            special::m_projective_second_identity_defect(&d_m_projective, &p, &rhat, &d_ric, &d_ric_o, &g);
        invariants.push((
            "m_projective_second_bianchi",
            rel(second.max_abs(), d_m_projective.max_abs()),
            1e-7,
        ));
        let e = conn.v_eta_derivative(&st_j.m_projective).values();
        invariants.push((
            "m_projective_vertical_eta",
            rel(e.max_abs(), special.m_projective.max_abs()),
            1e-9,
        ));

        Ok(PointAnalysis {
            point: conn.point().clone(),
            spray: conn.spray.values(),
            nonlinear: conn.nonlinear.values(),
            coeffs: conn.coeffs.values(),
            cartan,
            g,
            g_inv,
            frame,
            r,
            rhat,
            p,
            s,
            phat,
            special,
            d_r,
            d_ric,
            d_ric_o,
            d_concircular,
            d_projective,
            d_m_projective,
            d_scalar,
            invariants,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Invariants whose residual exceeds the tolerance.
    pub fn violations(&self) -> Vec<(&'static str, S, f64)> {
        self.invariants
            .iter()
            .filter(|(_, v, tol)| !(v.to_f64_lossy() <= *tol))
            .cloned()
            .collect()
    }

    /// Every class verdict, in [`CLASS_NAMES`] order.
    pub fn classify(&self, tol: &Tolerances) -> Vec<(&'static str, ClassVerdict)> {
        let st = &self.special;
        let f = &self.frame;
        let gen = generalized_ricci(&st.ric_o, &st.scalar, f, tol.classify);
        let ricci_finsler = ricci_finsler(&gen, &st.scalar, self.dim(), tol.classify);
        let ric_zero = f.norm(&st.ric).to_f64_lossy() <= tol.classify;
        let gated = |t: &ComponentTensor<S>, d: &ComponentTensor<S>| {
            if ric_zero {
                ClassVerdict::inapplicable("Ricci tensor vanishes")
            } else {
                recurrence(d, t, f, tol.classify)
            }
        };
        let plain = if f.norm(&self.r).to_f64_lossy() <= tol.classify {
            ClassVerdict::inapplicable("h-curvature vanishes")
        } else {
            recurrence(&self.d_r, &self.r, f, tol.classify)
        };
        vec![
            (CLASS_NAMES[0], horizontally_integrable(&self.rhat, &self.r, tol.classify)),
            (CLASS_NAMES[1], gen),
            (CLASS_NAMES[2], ricci_finsler),
            (CLASS_NAMES[3], semi_isotropic(self, tol.classify)),
            (CLASS_NAMES[4], plain),
            (CLASS_NAMES[5], gated(&st.ric, &self.d_ric)),
            (CLASS_NAMES[6], gated(&st.concircular, &self.d_concircular)),
            (CLASS_NAMES[7], gated(&st.projective, &self.d_projective)),
            (CLASS_NAMES[8], gated(&st.m_projective, &self.d_m_projective)),
        ]
    }
}

/// Passes iff `max|R̂| ≤ tol · max(1, max|R|)`.
pub fn horizontally_integrable<S: Real>(
    rhat: &ComponentTensor<S>,
    r: &ComponentTensor<S>,
    tol: f64,
) -> ClassVerdict
where
    S: Scalar<Real = S>,
{
    let residual = rel(rhat.max_abs(), r.max_abs()).to_f64_lossy();
    let v = if residual <= tol { Verdict::Pass } else { Verdict::Fail };
    ClassVerdict::new(v, residual)
}

/// `Ric_o ∘ Ric_o` as a `[Upper, Lower]` tensor.
pub fn operator_square<S: Real>(op: &ComponentTensor<S>) -> ComponentTensor<S> {
    let n = op.dim();
    ComponentTensor::from_fn(n, op.variance().to_vec(), |ia| {
        (0..n).fold(S::zero(), |acc, m| acc + *op.get(&[ia[0], m]) * *op.get(&[m, ia[1]]))
    })
}

/// `Ric_o² = α Ric_o` with `α = ⟨Ric_o², Ric_o⟩ / ⟨Ric_o, Ric_o⟩`.
///
/// The residual is `‖Ric_o² − α Ric_o‖ / max(1, ‖Ric_o²‖)`; inapplicable when
/// `‖Ric_o‖ ≤ tol`.
pub fn generalized_ricci<S: Real + Scalar<Real = S>>(
    ric_o: &ComponentTensor<S>,
    scalar: &S,
    frame: &Frame<S>,
    tol: f64,
) -> ClassVerdict {
    let norm = frame.norm(ric_o);
    if norm.to_f64_lossy() <= tol {
        return ClassVerdict::inapplicable("Ricci tensor vanishes");
    }
    let sq = operator_square(ric_o);
    let alpha = frame.inner(&sq, ric_o) / (norm * norm);
    let defect = frame.norm(&sq.sub(&ric_o.scale(alpha)).expect("same shape"));
    let residual = rel(defect, frame.norm(&sq)).to_f64_lossy();
    let a = alpha.to_f64_lossy();
    let v = if residual <= tol && a.abs() > tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut out = ClassVerdict::new(v, residual);
    out.alpha = Some(a);
    if v == Verdict::Pass && a.abs() <= tol {
        out.note = Some("associated scalar vanishes".into());
    }
    let _ = scalar;
    out
}

/// Refines a generalized-Ricci verdict by `α = r/(n−1)`.
pub fn ricci_finsler<S: Real>(gen: &ClassVerdict, scalar: &S, n: usize, tol: f64) -> ClassVerdict {
    if gen.verdict == Verdict::Inapplicable {
        return gen.clone();
    }
    let alpha = gen.alpha.unwrap_or(0.0);
    let target = scalar.to_f64_lossy() / (n as f64 - 1.0);
    let gap = (alpha - target).abs() / alpha.abs().max(1.0);
    let residual = gen.residual.max(gap);
    let v = if gen.passed() && gap <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut out = ClassVerdict::new(v, residual);
    out.alpha = gen.alpha;
    out
}

/// Semi-isotropy `R(X,Y,Z,W) = A(X,Z)A(Y,W) − A(X,W)A(Y,Z)`, tested with the
/// candidates `A = Ric` (when symmetric) and `A = sqrt(r/(n(n−1))) g` (when `r > 0`).
pub fn semi_isotropic<S: Real + Scalar<Real = S>>(pa: &PointAnalysis<S>, tol: f64) -> ClassVerdict {
    if pa.frame.norm(&pa.r).to_f64_lossy() <= tol {
        return ClassVerdict::inapplicable("h-curvature vanishes");
    }
    let r_low = match special::lowered(&pa.r, &pa.g, &pa.g_inv) {
        Ok(t) => t,
        Err(e) => return ClassVerdict::inapplicable(&e.to_string()),
    };
    let scale = r_low.max_abs();
    let n = pa.dim() as f64;
    let mut candidates: Vec<(&str, ComponentTensor<S>)> = vec![("ricci", pa.special.ric.clone())];
    let r = pa.special.scalar.to_f64_lossy();
    if r > 0.0 {
        candidates.push(("isotropic", pa.g.scale(S::of((r / (n * (n - 1.0))).sqrt()))));
    }
    let mut best: Option<(f64, &str)> = None;
    for (name, a) in &candidates {
        if let Ok(res) = special::semi_isotropic_residual(&r_low, a) {
            let res = rel(res, scale).to_f64_lossy();
            if best.is_none_or(|(b, _)| res < b) {
                best = Some((res, name));
            }
        }
    }
    match best {
        None => ClassVerdict::inapplicable("no symmetric candidate tensor"),
        Some((res, name)) => {
            let v = if res <= tol { Verdict::Pass } else { Verdict::Fail };
            let mut out = ClassVerdict::new(v, res);
            out.note = Some(format!("best candidate: {name}"));
            out
        }
    }
}

/// Recurrence `∇ʰT = A ⊗ T` from the derivative stack `d` (direction slot first).
///
/// The symmetric case `∇ʰT = 0` is checked first, so it passes even when `T`
/// itself vanishes.
pub fn recurrence<S: Real + Scalar<Real = S>>(
    d: &ComponentTensor<S>,
    t: &ComponentTensor<S>,
    frame: &Frame<S>,
    tol: f64,
) -> ClassVerdict {
    let n = t.dim();
    let slices: Vec<ComponentTensor<S>> = (0..n).map(|k| d.slice_first(k)).collect();
    let dmax = slices
        .iter()
        .fold(S::zero(), |m, s| Float::max(m, frame.norm(s)))
        .to_f64_lossy();
    if dmax <= tol {
        let mut out = ClassVerdict::new(Verdict::Pass, dmax);
        out.form = Some(vec![0.0; n]);
        out.symmetric = Some(true);
        return out;
    }
    match rank1_fit(&slices, t, frame, S::of(tol)) {
        Ok(fit) => {
            let mut out = ClassVerdict::new(Verdict::Pass, fit.residual.to_f64_lossy());
            out.form = Some(fit.form.iter().map(|v| v.to_f64_lossy()).collect());
            out.symmetric = Some(false);
            out
        }
        Err(FitError::ZeroTensor { .. }) => ClassVerdict::inapplicable("tensor vanishes"),
        Err(FitError::NoFit { residual, form, .. }) => {
            let mut out = ClassVerdict::new(Verdict::Fail, residual);
            out.form = Some(form);
            out
        }
    }
}

/// Stacks per-direction slices into one tensor with the direction slot first.
pub fn stack<S: Real>(slices: &[ComponentTensor<S>]) -> ComponentTensor<S> {
    let n = slices[0].dim();
    let mut variance = vec![Variance::Lower];
    variance.extend_from_slice(slices[0].variance());
    let data = slices.iter().flat_map(|s| s.data().iter().copied()).collect();
    ComponentTensor::new(n, variance, data)
}

/// True when `a` and `b` agree componentwise within `tol · max(1, |a|, |b|)`.
pub fn forms_match(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

/// `max |Ric − (r/n) g|` relative to `max(1, max|Ric|)`.
pub fn einstein_defect<S: Real + Scalar<Real = S>>(
    ric: &ComponentTensor<S>,
    g: &ComponentTensor<S>,
    scalar: S,
) -> S {
    let n = S::of(ric.dim() as f64);
    let target = g.scale(scalar / n);
    rel(ric.sub(&target).expect("same shape").max_abs(), ric.max_abs())
}

/// Largest asymmetry of `Ric`, relative.
pub fn ricci_asymmetry<S: Real + Scalar<Real = S>>(ric: &ComponentTensor<S>) -> S {
    rel(ric.symmetry_defect(Symmetry::Symmetric(0, 1)), ric.max_abs())
}

/// Bilinear evaluation `B(u, v) = B_ab u^a v^b`.
pub fn bilinear<S: Real>(b: &ComponentTensor<S>, u: &[S], v: &[S]) -> S {
    multi_indices(b.dim(), 2).fold(S::zero(), |acc, ab| acc + *b.get(&ab) * u[ab[0]] * v[ab[1]])
}

/// Operator application `(A u)^i = A^i_a u^a`.
pub fn apply<S: Real>(a: &ComponentTensor<S>, u: &[S]) -> Vec<S> {
    let n = a.dim();
    (0..n)
        .map(|i| (0..n).fold(S::zero(), |acc, k| acc + *a.get(&[i, k]) * u[k]))
        .collect()
}
