//! Cartan connection of a Finsler metric in natural coordinates `(x, y)`.
//!
//! Every coefficient is kept as a jet around the point so that further
//! horizontal (`δ_k = ∂_k − N^m_k ∂̇_m`) and vertical (`∂̇_k`) derivatives can
//! be taken without re-evaluating the metric.
//!
//! Sign convention: the curvature operators are `R(X,Y)Z = −K(βX,βY)Z`,
//! `P(X,Y)Z = −K(βX,γY)Z`, `S(X,Y)Z = −K(γX,γY)Z`, with `K` the commutator
//! curvature `∇_U∇_V − ∇_V∇_U − ∇_[U,V]`. With this sign a space of constant
//! curvature `k` has `R(X,Y)Z = k(g(X,Z)Y − g(Y,Z)X)` and positive Ricci
//! curvature. Tensors are stored with the output index first, then the
//! arguments in the order written: `R[i, a, b, c]` is the `i`-th component of
//! `R(∂_a, ∂_b)∂_c`.

use num_traits::Float;
use thiserror::Error;

use crate::dsl::DomainError;
use crate::jet::{jet_seed, Jet};
use crate::linalg;
use crate::metric::MetricSpec;
use crate::scalar::{Real, Scalar};
use crate::tensor::{multi_indices, ComponentTensor, TangentPoint, TensorError, Variance};

use Variance::{Lower as L, Upper as U};

/// Jet order needed for one covariant derivative of the curvature.
pub const DEFAULT_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("point dimension {got} does not match metric dimension {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("jet order {0} too low (need at least 3)")]
    OrderTooLow(usize),
}

fn jsum<S: Real>(it: impl IntoIterator<Item = Jet<S>>) -> Jet<S> {
    it.into_iter().reduce(|a, b| a + b).expect("non-empty sum")
}

/// Positive-definiteness and invertibility checks on a metric matrix.
fn check_metric<S: Real + Scalar<Real = S>>(g: &[S], n: usize) -> Result<(), TensorError> {
    let trace = (0..n).fold(S::zero(), |acc, i| acc + g[i * n + i].abs());
    let (eig, _) = linalg::symmetric_eigen(g, n);
    if linalg::invert(g, n, 1e-12).is_none() {
        return Err(TensorError::SingularMetric);
    }
    if eig[0] <= S::of(1e-10) * trace {
        return Err(TensorError::NotPositiveDefinite {
            eigenvalues: eig.iter().map(|v| v.to_f64_lossy()).collect(),
        });
    }
    Ok(())
}

/// `g_ij = ½ ∂²F²/∂y^i∂y^j` and its inverse at a point.
pub fn fundamental_tensor<S>(
    spec: &MetricSpec,
    p: &TangentPoint<S>,
) -> Result<(ComponentTensor<S>, ComponentTensor<S>), EngineError>
where
    S: Real + Scalar<Real = S>,
{
    let n = check_dim(spec, p)?;
    let z = jet_seed(&p.coords(), 2);
    let e = spec.energy(&z[..n], &z[n..])?;
    let g: Vec<S> = multi_indices(n, 2)
        .map(|ij| {
            let mut mi = vec![0u8; 2 * n];
            mi[n + ij[0]] += 1;
            mi[n + ij[1]] += 1;
            e.partial(&mi).expect("order 2 available") * S::of(0.5)
        })
        .collect();
    check_metric(&g, n)?;
    let inv = linalg::invert(&g, n, 1e-12).ok_or(TensorError::SingularMetric)?;
    Ok((
        ComponentTensor::new(n, vec![L, L], g),
        ComponentTensor::new(n, vec![U, U], inv),
    ))
}

fn check_dim<S: Real>(spec: &MetricSpec, p: &TangentPoint<S>) -> Result<usize, EngineError> {
    if p.dim() != spec.dim() {
        return Err(EngineError::Dimension {
            got: p.dim(),
            expected: spec.dim(),
        });
    }
    Ok(spec.dim())
}

/// Cartan connection coefficients around one point of the slit tangent bundle.
#[derive(Debug, Clone)]
pub struct ConnectionData<S: Real> {
    point: TangentPoint<S>,
    order: usize,
    coords: Vec<Jet<S>>,
    /// `F²` (order K).
    pub energy: Jet<S>,
    /// `g_ij` (order K−2).
    pub g: ComponentTensor<Jet<S>>,
    /// `g^ij` (order K−2).
    pub g_inv: ComponentTensor<Jet<S>>,
    /// Spray coefficients `G^i` (order K−2).
    pub spray: ComponentTensor<Jet<S>>,
    /// Nonlinear connection `N^i_j = ∂̇_j G^i` (order K−3).
    pub nonlinear: ComponentTensor<Jet<S>>,
    /// Cartan tensor `T^i_jk = ½ g^il ∂̇_k g_jl`, the (h)hv-torsion (order K−3).
    pub cartan: ComponentTensor<Jet<S>>,
    /// Lowered Cartan tensor `T_ijk = ½ ∂̇_k g_ij`.
    pub cartan_lowered: ComponentTensor<Jet<S>>,
    /// Horizontal coefficients `F^i_jk` (order K−3).
    pub coeffs: ComponentTensor<Jet<S>>,
}

impl<S: Real> ConnectionData<S>
where
    S: Scalar<Real = S>,
{
    pub fn new(spec: &MetricSpec, p: &TangentPoint<S>) -> Result<Self, EngineError> {
        Self::with_order(spec, p, DEFAULT_ORDER)
    }

    /// Builds the connection from jets of `F²` of the given order (≥ 3).
    ///
    /// Order `K` leaves curvature with `K − 4` spare derivative orders.
    pub fn with_order(
        spec: &MetricSpec,
        p: &TangentPoint<S>,
        order: usize,
    ) -> Result<Self, EngineError> {
        if order < 3 {
            return Err(EngineError::OrderTooLow(order));
        }
        let n = check_dim(spec, p)?;
        let coords = jet_seed(&p.coords(), order);
        let energy = spec.energy(&coords[..n], &coords[n..])?;

        let de_dy: Vec<Jet<S>> = (0..n).map(|i| energy.derivative(n + i)).collect();
        let g = ComponentTensor::from_fn(n, vec![L, L], |ij| {
            &de_dy[ij[0]].derivative(n + ij[1]) * S::of(0.5)
        });
        let gv: Vec<S> = g.data().iter().map(|j| j.value()).collect();
        check_metric(&gv, n)?;
        let inv = linalg::invert(g.data(), n, 1e-12).ok_or(TensorError::SingularMetric)?;
        let g_inv = ComponentTensor::new(n, vec![U, U], inv);

        // G^i = ¼ g^il (y^k ∂_k ∂̇_l F² − ∂_l F²)
        let bracket: Vec<Jet<S>> = (0..n)
            .map(|l| {
                let mixed = jsum((0..n).map(|k| &coords[n + k] * &de_dy[l].derivative(k)));
                mixed - energy.derivative(l)
            })
            .collect();
        let spray = ComponentTensor::from_fn(n, vec![U], |i| {
            let s = jsum((0..n).map(|l| g_inv.get(&[i[0], l]) * &bracket[l]));
            &s * S::of(0.25)
        });
        let nonlinear =
            ComponentTensor::from_fn(n, vec![U, L], |ij| spray.get(&[ij[0]]).derivative(n + ij[1]));

        let cartan_lowered = ComponentTensor::from_fn(n, vec![L, L, L], |ijk| {
            &g.get(&[ijk[0], ijk[1]]).derivative(n + ijk[2]) * S::of(0.5)
        });
        let cartan = ComponentTensor::from_fn(n, vec![U, L, L], |ijk| {
            jsum((0..n).map(|l| g_inv.get(&[ijk[0], l]) * cartan_lowered.get(&[l, ijk[1], ijk[2]])))
        });

        // δ_j g_lk, reused by all three Christoffel-type terms
        let dg = ComponentTensor::from_fn(n, vec![L, L, L], |jlk| {
            delta_with(&nonlinear, g.get(&[jlk[1], jlk[2]]), jlk[0])
        });
        let lowered = ComponentTensor::from_fn(n, vec![L, L, L], |ljk| {
            let (l, j, k) = (ljk[0], ljk[1], ljk[2]);
            let s = dg.get(&[j, l, k]).clone() + dg.get(&[k, j, l]).clone() - dg.get(&[l, j, k]).clone();
            &s * S::of(0.5)
        });
        let coeffs = ComponentTensor::from_fn(n, vec![U, L, L], |ijk| {
            jsum((0..n).map(|l| g_inv.get(&[ijk[0], l]) * lowered.get(&[l, ijk[1], ijk[2]])))
        });
        let conn = ConnectionData {
            point: p.clone(),
            order,
            coords,
            energy,
            g,
            g_inv,
            spray,
            nonlinear,
            cartan,
            cartan_lowered,
            coeffs,
        };
        Ok(conn)
    }

    pub fn point(&self) -> &TangentPoint<S> {
        &self.point
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The fundamental π-vector field `η` (components `y^i`) as jets.
    pub fn eta(&self) -> ComponentTensor<Jet<S>> {
        let n = self.dim();
        ComponentTensor::from_fn(n, vec![U], |i| self.coords[n + i[0]].clone())
    }

    /// `δ_k f = ∂f/∂x^k − N^m_k ∂f/∂y^m`.
    pub fn delta(&self, f: &Jet<S>, k: usize) -> Jet<S> {
        delta_with(&self.nonlinear, f, k)
    }

    /// `∂̇_k f = ∂f/∂y^k`.
    pub fn vdot(&self, f: &Jet<S>, k: usize) -> Jet<S> {
        f.derivative(self.dim() + k)
    }

    /// `∇ʰT`, with the derivative direction as the new FIRST slot.
    pub fn h_covariant_derivative(&self, t: &ComponentTensor<Jet<S>>) -> ComponentTensor<Jet<S>> {
        self.covariant(t, &self.coeffs, |f, k| self.delta(f, k))
    }

    /// `∇ᵛT`, with the derivative direction as the new FIRST slot.
    pub fn v_covariant_derivative(&self, t: &ComponentTensor<Jet<S>>) -> ComponentTensor<Jet<S>> {
        self.covariant(t, &self.cartan, |f, k| self.vdot(f, k))
    }

    fn covariant(
        &self,
        t: &ComponentTensor<Jet<S>>,
        gamma: &ComponentTensor<Jet<S>>,
        d: impl Fn(&Jet<S>, usize) -> Jet<S>,
    ) -> ComponentTensor<Jet<S>> {
        let n = self.dim();
        let mut variance = vec![L];
        variance.extend_from_slice(t.variance());
        let mut src = vec![0; t.rank()];
        ComponentTensor::from_fn(n, variance, |idx| {
            let k = idx[0];
            let rest = &idx[1..];
            let mut acc = d(t.get(rest), k);
            for (slot, v) in t.variance().iter().enumerate() {
                src.copy_from_slice(rest);
                for m in 0..n {
                    src[slot] = m;
                    let term = match v {
                        U => gamma.get(&[rest[slot], m, k]) * t.get(&src),
                        L => -(gamma.get(&[m, rest[slot], k]) * t.get(&src)),
                    };
                    acc = acc + term;
                }
            }
            acc
        })
    }

    /// `∇_{γη} T = y^k (∇ᵛT)_k`.
    pub fn v_eta_derivative(&self, t: &ComponentTensor<Jet<S>>) -> ComponentTensor<Jet<S>> {
        let dv = self.v_covariant_derivative(t);
        let n = self.dim();
        let block = t.data().len();
        let data = (0..block)
            .map(|b| jsum((0..n).map(|k| &self.coords[n + k] * &dv.data()[k * block + b])))
            .collect();
        ComponentTensor::new(n, t.variance().to_vec(), data)
    }

    /// `y^k ∂̇_k f` componentwise (the Euler operator).
    pub fn euler(&self, t: &ComponentTensor<Jet<S>>) -> ComponentTensor<Jet<S>> {
        let n = self.dim();
        t.map(|f| jsum((0..n).map(|k| &self.coords[n + k] * &f.derivative(n + k))))
    }

    /// Standard-sign `K(δ_k, δ_l)∂_j` components, indexed `[i, j, k, l]`, and `[δ_k, δ_l] = −R̂^m_kl ∂̇_m`.
    fn std_h_curvature(&self) -> (ComponentTensor<Jet<S>>, ComponentTensor<Jet<S>>) {
        let n = self.dim();
        let (f, c, nl) = (&self.coeffs, &self.cartan, &self.nonlinear);
        let rhat = ComponentTensor::from_fn(n, vec![U, L, L], |mkl| {
            let (m, k, l) = (mkl[0], mkl[1], mkl[2]);
            self.delta(nl.get(&[m, l]), k) - self.delta(nl.get(&[m, k]), l)
        });
        let r = ComponentTensor::from_fn(n, vec![U, L, L, L], |ijkl| {
            let (i, j, k, l) = (ijkl[0], ijkl[1], ijkl[2], ijkl[3]);
            let mut acc = self.delta(f.get(&[i, j, l]), k) - self.delta(f.get(&[i, j, k]), l);
            for m in 0..n {
                acc = acc + f.get(&[m, j, l]) * f.get(&[i, m, k]) - f.get(&[m, j, k]) * f.get(&[i, m, l])
                    + c.get(&[i, j, m]) * rhat.get(&[m, k, l]);
            }
            acc
        });
        (r, rhat)
    }

    /// h-curvature `R` (type (1,3)) and the (v)h-torsion `R̂(X,Y) = R(X,Y)η` (type (1,2)).
    pub fn h_curvature(&self) -> (ComponentTensor<Jet<S>>, ComponentTensor<Jet<S>>) {
        let n = self.dim();
        let (r, rhat) = self.std_h_curvature();
        let r_out =
            ComponentTensor::from_fn(n, vec![U, L, L, L], |iabc| -r.get(&[iabc[0], iabc[3], iabc[1], iabc[2]]).clone());
        (r_out, rhat.map(|v| -v.clone()))
    }

    /// hv-curvature `P` from the commutator `K(δ_k, ∂̇_l)` on coordinate sections,
    /// v-curvature `S` from the commutator `K(∂̇_k, ∂̇_l)`, and their contractions with `η`.
    pub fn hv_and_v_curvature(&self) -> HvCurvature<S> {
        let n = self.dim();
        let (f, c, nl) = (&self.coeffs, &self.cartan, &self.nonlinear);
        // standard sign, indexed [i, j, k, l] for K(δ_k, ∂̇_l)∂_j
        let p_std = ComponentTensor::from_fn(n, vec![U, L, L, L], |ijkl| {
            let (i, j, k, l) = (ijkl[0], ijkl[1], ijkl[2], ijkl[3]);
            let mut acc = self.delta(c.get(&[i, j, l]), k) - self.vdot(f.get(&[i, j, k]), l);
            for m in 0..n {
                acc = acc + c.get(&[m, j, l]) * f.get(&[i, m, k])
                    - f.get(&[m, j, k]) * c.get(&[i, m, l])
                    - self.vdot(nl.get(&[m, k]), l) * c.get(&[i, j, m]).clone();
            }
            acc
        });
        let s_std = ComponentTensor::from_fn(n, vec![U, L, L, L], |ijkl| {
            let (i, j, k, l) = (ijkl[0], ijkl[1], ijkl[2], ijkl[3]);
            let mut acc = self.vdot(c.get(&[i, j, l]), k) - self.vdot(c.get(&[i, j, k]), l);
            for m in 0..n {
                acc = acc + c.get(&[m, j, l]) * c.get(&[i, m, k]) - c.get(&[m, j, k]) * c.get(&[i, m, l]);
            }
            acc
        });
        let flip = |t: &ComponentTensor<Jet<S>>| {
            ComponentTensor::from_fn(n, vec![U, L, L, L], |iabc| -t.get(&[iabc[0], iabc[3], iabc[1], iabc[2]]).clone())
        };
        let p = flip(&p_std);
        let s = flip(&s_std);
        let phat = contract_last_with_eta(&p, &self.eta());
        let shat = contract_last_with_eta(&s, &self.eta());
        HvCurvature { p, s, phat, shat }
    }

    /// `P̂(X,Y)` from the closed form `∂̇_b N^i_a − F^i_ab`, independent of `P`.
    pub fn phat_direct(&self) -> ComponentTensor<Jet<S>> {
        let n = self.dim();
        ComponentTensor::from_fn(n, vec![U, L, L], |iab| {
            self.vdot(self.nonlinear.get(&[iab[0], iab[1]]), iab[2]) - self.coeffs.get(&[iab[0], iab[1], iab[2]]).clone()
        })
    }

    /// `S` from the algebraic form `T^m_cb T^i_ma − T^m_ca T^i_mb`.
    pub fn s_algebraic(&self) -> ComponentTensor<Jet<S>> {
        let n = self.dim();
        let c = &self.cartan;
        ComponentTensor::from_fn(n, vec![U, L, L, L], |iabc| {
            let (i, a, b, cc) = (iabc[0], iabc[1], iabc[2], iabc[3]);
            jsum((0..n).map(|m| {
                c.get(&[m, cc, b]) * c.get(&[i, m, a]) - c.get(&[m, cc, a]) * c.get(&[i, m, b])
            }))
        })
    }

    /// Residuals of the connection axioms and homogeneity identities, each
    /// relative to `max(1, scale of the quantities involved)`.
    pub fn axiom_residuals(&self) -> AxiomResiduals<S> {
        let n = self.dim();
        let rel = |defect: S, scale: S| defect / Float::max(S::one(), scale);
        let grad_g = self.h_covariant_derivative(&self.g);
        let vgrad_g = self.v_covariant_derivative(&self.g);
        let f = self.coeffs.values();
        let mut coeff_sym = S::zero();
        let ct = self.cartan_lowered.values();
        let mut cartan_sym = S::zero();
        for ijk in multi_indices(n, 3) {
            let (i, j, k) = (ijk[0], ijk[1], ijk[2]);
            coeff_sym = Float::max(coeff_sym, (*f.get(&[i, j, k]) - *f.get(&[i, k, j])).abs());
            let v = *ct.get(&[i, j, k]);
            for perm in [[j, i, k], [k, j, i], [i, k, j]] {
                cartan_sym = Float::max(cartan_sym, (v - *ct.get(&perm)).abs());
            }
        }
        let eta = self.eta();
        let cartan_eta = contract_last_with_eta(&self.cartan, &eta).max_abs();
        let regularity = self.h_covariant_derivative(&eta).max_abs();
        let g_scale = self.g.max_abs();
        let euler_g = self.euler(&self.g).max_abs();
        let euler_n = self.euler(&self.nonlinear).sub(&self.nonlinear).expect("same shape").max_abs();
        let two_g = self.spray.scale(S::of(2.0));
        let euler_spray = self.euler(&self.spray).sub(&two_g).expect("same shape").max_abs();
        AxiomResiduals {
            h_metricity: rel(grad_g.max_abs(), g_scale),
            v_metricity: rel(vgrad_g.max_abs(), g_scale),
            coefficient_symmetry: rel(coeff_sym, f.max_abs()),
            cartan_symmetry: rel(cartan_sym, ct.max_abs()),
            cartan_eta: rel(cartan_eta, ct.max_abs()),
            regularity: rel(regularity, self.nonlinear.max_abs()),
            euler_g: rel(euler_g, g_scale),
            euler_nonlinear: rel(euler_n, self.nonlinear.max_abs()),
            euler_spray: rel(euler_spray, self.spray.max_abs()),
        }
    }
}

/// hv- and v-curvature with their `η` contractions.
#[derive(Debug, Clone)]
pub struct HvCurvature<S: Real> {
    pub p: ComponentTensor<Jet<S>>,
    pub s: ComponentTensor<Jet<S>>,
    pub phat: ComponentTensor<Jet<S>>,
    pub shat: ComponentTensor<Jet<S>>,
}

/// Relative residuals of the connection axioms at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomResiduals<S> {
    pub h_metricity: S,
    pub v_metricity: S,
    pub coefficient_symmetry: S,
    pub cartan_symmetry: S,
    pub cartan_eta: S,
    pub regularity: S,
    pub euler_g: S,
    pub euler_nonlinear: S,
    pub euler_spray: S,
}

impl<S: Real> AxiomResiduals<S> {
    /// `(name, residual, tolerance)` triples.
    pub fn entries(&self) -> Vec<(&'static str, S, f64)> {
        vec![
            ("h_metricity", self.h_metricity, 1e-10),
            ("v_metricity", self.v_metricity, 1e-10),
            ("coefficient_symmetry", self.coefficient_symmetry, 1e-12),
            ("cartan_total_symmetry", self.cartan_symmetry, 1e-10),
            ("cartan_annihilates_eta", self.cartan_eta, 1e-10),
            ("regularity", self.regularity, 1e-10),
            ("euler_g_degree0", self.euler_g, 1e-9),
            ("euler_nonlinear_degree1", self.euler_nonlinear, 1e-9),
            ("euler_spray_degree2", self.euler_spray, 1e-9),
        ]
    }
}

fn delta_with<S: Real>(nonlinear: &ComponentTensor<Jet<S>>, f: &Jet<S>, k: usize) -> Jet<S> {
    let n = nonlinear.dim();
    let mut out = f.derivative(k);
    for m in 0..n {
        out = out - nonlinear.get(&[m, k]) * &f.derivative(n + m);
    }
    out
}

/// Contracts the last lower slot of `t` with `η`.
pub fn contract_last_with_eta<T: Scalar>(
    t: &ComponentTensor<T>,
    eta: &ComponentTensor<T>,
) -> ComponentTensor<T> {
    let n = t.dim();
    let rank = t.rank();
    let block = n;
    let data = (0..t.data().len() / block)
        .map(|b| {
            (0..n)
                .map(|c| t.data()[b * block + c].clone() * eta.data()[c].clone())
                .reduce(|a, b| a + b)
                .unwrap()
        })
        .collect();
    ComponentTensor::new(n, t.variance()[..rank - 1].to_vec(), data)
}
