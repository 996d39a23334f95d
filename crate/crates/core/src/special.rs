//! Tensors derived from the h-curvature: Ricci data, the concircular,
//! projective and m-projective curvature tensors, and the identities they
//! satisfy.
//!
//! Layout follows [`crate::cartan`]: `T[i, a, b, c]` is the `i`-th component
//! of `T(∂_a, ∂_b)∂_c`, and 4-forms `T(X,Y,Z,W) = g(T(X,Y)Z, W)` are stored
//! `[a, b, c, d]`. The Ricci tensor is `Ric(X,Z) = tr(Y ↦ R(X,Y)Z)` and
//! `g(Ric_o X, Y) = Ric(X, Y)`.

use num_traits::Float;
use thiserror::Error;

use crate::scalar::{Real, Scalar};
use crate::tensor::{multi_indices, ComponentTensor, TensorError, Variance};

use Variance::{Lower as L, Upper as U};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("associated tensor is not symmetric (defect {0:e})")]
    AsymmetricA(f64),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

fn one_like<T: Scalar>(t: &ComponentTensor<T>) -> T {
    t.data()[0].lift_f64(1.0)
}

fn delta<T: Scalar>(proto: &T, i: usize, j: usize) -> T {
    proto.lift_f64(if i == j { 1.0 } else { 0.0 })
}

/// `Ric`, `Ric_o` and `r = tr Ric_o` from the h-curvature.
pub fn ricci_and_scalar<T: Scalar>(
    r: &ComponentTensor<T>,
    g: &ComponentTensor<T>,
    g_inv: &ComponentTensor<T>,
) -> Result<(ComponentTensor<T>, ComponentTensor<T>, T), TensorError> {
    let ric = r.contract(0, 2)?;
    let ric_o = ricci_operator(&ric, g, g_inv)?;
    let scalar = ric_o.contract(0, 1)?.data()[0].clone();
    Ok((ric, ric_o, scalar))
}

/// `Ric_o^i_a = g^ib Ric_ab`, stored `[Upper, Lower]`.
pub fn ricci_operator<T: Scalar>(
    ric: &ComponentTensor<T>,
    g: &ComponentTensor<T>,
    g_inv: &ComponentTensor<T>,
) -> Result<ComponentTensor<T>, TensorError> {
    Ok(ric.raise_lower(1, g, g_inv)?.permute(&[1, 0]))
}

/// `G(X,Y)Z = g(X,Z)Y − g(Y,Z)X`.
pub fn g_curvature_like<T: Scalar>(g: &ComponentTensor<T>) -> ComponentTensor<T> {
    let proto = one_like(g);
    ComponentTensor::from_fn(g.dim(), vec![U, L, L, L], |iabc| {
        let (i, a, b, c) = (iabc[0], iabc[1], iabc[2], iabc[3]);
        g.get(&[a, c]).clone() * delta(&proto, i, b) - g.get(&[b, c]).clone() * delta(&proto, i, a)
    })
}

/// `C = R − r/(n(n−1)) G`.
pub fn concircular<T: Scalar>(
    r: &ComponentTensor<T>,
    gt: &ComponentTensor<T>,
    scalar: &T,
) -> Result<ComponentTensor<T>, TensorError> {
    let n = r.dim() as f64;
    let factor = scalar.clone() * scalar.lift_f64(1.0 / (n * (n - 1.0)));
    r.sub(&gt.scale_by(&factor))
}

/// `Ric(X,Z)Y − Ric(Y,Z)X`.
pub fn ricci_wedge<T: Scalar>(ric: &ComponentTensor<T>) -> ComponentTensor<T> {
    let proto = one_like(ric);
    ComponentTensor::from_fn(ric.dim(), vec![U, L, L, L], |iabc| {
        let (i, a, b, c) = (iabc[0], iabc[1], iabc[2], iabc[3]);
        ric.get(&[a, c]).clone() * delta(&proto, i, b) - ric.get(&[b, c]).clone() * delta(&proto, i, a)
    })
}

/// `ℙ = R − 1/(n−1) {Ric(X,Z)Y − Ric(Y,Z)X}`.
pub fn projective<T: Scalar>(
    r: &ComponentTensor<T>,
    ric: &ComponentTensor<T>,
) -> Result<ComponentTensor<T>, TensorError> {
    let n = r.dim() as f64;
    r.sub(&ricci_wedge(ric).scale(T::Real::of(1.0 / (n - 1.0))))
}

/// The bracket of the m-projective tensor:
/// `Ric(X,Z)Y − Ric(Y,Z)X + g(X,Z)Ric_o Y − g(Y,Z)Ric_o X`.
///
/// It is linear in `(Ric, Ric_o)`, so it also maps `(∇Ric, ∇Ric_o)` slices to
/// the derivative of the correction.
pub fn m_projective_correction<T: Scalar>(
    ric: &ComponentTensor<T>,
    ric_o: &ComponentTensor<T>,
    g: &ComponentTensor<T>,
) -> ComponentTensor<T> {
    let wedge = ricci_wedge(ric);
    let op = ComponentTensor::from_fn(ric.dim(), vec![U, L, L, L], |iabc| {
        let (i, a, b, c) = (iabc[0], iabc[1], iabc[2], iabc[3]);
        g.get(&[a, c]).clone() * ric_o.get(&[i, b]).clone()
            - g.get(&[b, c]).clone() * ric_o.get(&[i, a]).clone()
    });
    wedge.add(&op).expect("same shape")
}

/// `ℍ = R − 1/(2(n−1)) {m-projective bracket}`.
pub fn m_projective<T: Scalar>(
    r: &ComponentTensor<T>,
    ric: &ComponentTensor<T>,
    ric_o: &ComponentTensor<T>,
    g: &ComponentTensor<T>,
) -> Result<ComponentTensor<T>, TensorError> {
    let n = r.dim() as f64;
    let corr = m_projective_correction(ric, ric_o, g);
    r.sub(&corr.scale(T::Real::of(1.0 / (2.0 * (n - 1.0)))))
}

/// `T(X,Y,Z,W) = g(T(X,Y)Z, W)` for a `[U, L, L, L]` tensor.
pub fn lowered<T: Scalar>(
    t: &ComponentTensor<T>,
    g: &ComponentTensor<T>,
    g_inv: &ComponentTensor<T>,
) -> Result<ComponentTensor<T>, TensorError> {
    Ok(t.raise_lower(0, g, g_inv)?.permute(&[1, 2, 3, 0]))
}

/// `A(X,Z)A(Y,W) − A(X,W)A(Y,Z)`.
pub fn wedge_square<T: Scalar>(a: &ComponentTensor<T>) -> ComponentTensor<T> {
    ComponentTensor::from_fn(a.dim(), vec![L, L, L, L], |xyzw| {
        let (x, y, z, w) = (xyzw[0], xyzw[1], xyzw[2], xyzw[3]);
        a.get(&[x, z]).clone() * a.get(&[y, w]).clone() - a.get(&[x, w]).clone() * a.get(&[y, z]).clone()
    })
}

/// Max-norm of `R(X,Y,Z,W) − (A(X,Z)A(Y,W) − A(X,W)A(Y,Z))`.
pub fn semi_isotropic_residual<S: Real + Scalar<Real = S>>(
    r_lowered: &ComponentTensor<S>,
    a: &ComponentTensor<S>,
) -> Result<S, SpecialError> {
    let scale = Float::max(S::one(), a.max_abs());
    let asym = a.symmetry_defect(crate::tensor::Symmetry::Symmetric(0, 1));
    if asym > S::of(1e-8) * scale {
        return Err(SpecialError::AsymmetricA(asym.to_f64_lossy()));
    }
    Ok(r_lowered.sub(&wedge_square(a))?.max_abs())
}

/// All special tensors at one point (or as jets around it).
#[derive(Debug, Clone)]
pub struct SpecialTensors<T> {
    pub ric: ComponentTensor<T>,
    pub ric_o: ComponentTensor<T>,
    pub scalar: T,
    pub g_tensor: ComponentTensor<T>,
    pub concircular: ComponentTensor<T>,
    pub projective: ComponentTensor<T>,
    pub m_projective: ComponentTensor<T>,
}

impl<T: Scalar> SpecialTensors<T> {
    pub fn compute(
        r: &ComponentTensor<T>,
        g: &ComponentTensor<T>,
        g_inv: &ComponentTensor<T>,
    ) -> Result<Self, TensorError> {
        let (ric, ric_o, scalar) = ricci_and_scalar(r, g, g_inv)?;
        let g_tensor = g_curvature_like(g);
        let concircular = concircular(r, &g_tensor, &scalar)?;
        let projective = projective(r, &ric)?;
        let m_projective = m_projective(r, &ric, &ric_o, g)?;
        Ok(SpecialTensors {
            ric,
            ric_o,
            scalar,
            g_tensor,
            concircular,
            projective,
            m_projective,
        })
    }

    pub fn values(&self) -> SpecialTensors<T::Real>
    where
        T::Real: Scalar<Real = T::Real>,
    {
        SpecialTensors {
            ric: self.ric.values(),
            ric_o: self.ric_o.values(),
            scalar: self.scalar.value(),
            g_tensor: self.g_tensor.values(),
            concircular: self.concircular.values(),
            projective: self.projective.values(),
            m_projective: self.m_projective.values(),
        }
    }
}

/// Cyclic sum over the first three argument slots of a `[U, L, L, L]` tensor
/// (`𝔖_{X,Y,Z} T(X,Y)Z`), returned as `[U, L, L, L]`.
pub fn cyclic_sum<T: Scalar>(t: &ComponentTensor<T>) -> ComponentTensor<T> {
    ComponentTensor::from_fn(t.dim(), t.variance().to_vec(), |iabc| {
        let (i, a, b, c) = (iabc[0], iabc[1], iabc[2], iabc[3]);
        t.get(&[i, a, b, c]).clone() + t.get(&[i, b, c, a]).clone() + t.get(&[i, c, a, b]).clone()
    })
}

/// First-Bianchi-type identity for `ℍ`:
/// `𝔖 ℍ(X,Y)Z − 𝔖 {T(R̂(X,Y),Z) − 1/(2(n−1)) [bracket](X,Y)Z}`.
pub fn m_projective_first_identity_defect<S: Real + Scalar<Real = S>>(
    h: &ComponentTensor<S>,
    cartan: &ComponentTensor<S>,
    rhat: &ComponentTensor<S>,
    ric: &ComponentTensor<S>,
    ric_o: &ComponentTensor<S>,
    g: &ComponentTensor<S>,
) -> ComponentTensor<S> {
    let n = h.dim();
    let corr = m_projective_correction(ric, ric_o, g);
    let rhs = ComponentTensor::from_fn(n, vec![U, L, L, L], |iabc| {
        let (i, a, b, c) = (iabc[0], iabc[1], iabc[2], iabc[3]);
        let torsion = (0..n).fold(S::zero(), |acc, m| acc + *cartan.get(&[i, m, c]) * *rhat.get(&[m, a, b]));
        torsion - *corr.get(&iabc) / S::of(2.0 * (n as f64 - 1.0))
    });
    cyclic_sum(h).sub(&cyclic_sum(&rhs)).expect("same shape")
}

/// Second-Bianchi-type identity for `ℍ`, derivative slot first in every `∇` input:
/// `𝔖_{X,Y,Z} (∇_{βX}ℍ)(Y,Z,W) + 𝔖 {P(X,R̂(Y,Z))W + 1/(2(n−1)) [(∇_X Ric)(Y,W)Z
/// − (∇_X Ric)(Z,W)Y + g(Y,W)(∇_X Ric_o)Z − g(Z,W)(∇_X Ric_o)Y]}`,
/// returned as `[i, x, y, z, w]`.
pub fn m_projective_second_identity_defect<S: Real + Scalar<Real = S>>(
    dh: &ComponentTensor<S>,
    p: &ComponentTensor<S>,
    rhat: &ComponentTensor<S>,
    dric: &ComponentTensor<S>,
    dric_o: &ComponentTensor<S>,
    g: &ComponentTensor<S>,
) -> ComponentTensor<S> {
    let n = dh.dim();
    let k = S::one() / S::of(2.0 * (n as f64 - 1.0));
    let d = |i: usize, j: usize| if i == j { S::one() } else { S::zero() };
    // term(x, y, z, w, i) before the cyclic sum
    let term = |i: usize, x: usize, y: usize, z: usize, w: usize| -> S {
        let pr = (0..n).fold(S::zero(), |acc, m| acc + *p.get(&[i, x, m, w]) * *rhat.get(&[m, y, z]));
        let bracket = *dric.get(&[x, y, w]) * d(i, z) - *dric.get(&[x, z, w]) * d(i, y)
            + *g.get(&[y, w]) * *dric_o.get(&[x, i, z])
            - *g.get(&[z, w]) * *dric_o.get(&[x, i, y]);
        *dh.get(&[x, i, y, z, w]) + pr + k * bracket
    };
    let data = multi_indices(n, 5)
        .map(|idx| {
            let (i, x, y, z, w) = (idx[0], idx[1], idx[2], idx[3], idx[4]);
            term(i, x, y, z, w) + term(i, y, z, x, w) + term(i, z, x, y, w)
        })
        .collect();
    ComponentTensor::new(n, vec![U, L, L, L, L], data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn euclid(n: usize) -> ComponentTensor<f64> {
        ComponentTensor::from_fn(n, vec![L, L], |ij| if ij[0] == ij[1] { 1.0 } else { 0.0 })
    }

    fn inv(n: usize) -> ComponentTensor<f64> {
        ComponentTensor::from_fn(n, vec![U, U], |ij| if ij[0] == ij[1] { 1.0 } else { 0.0 })
    }

    #[test]
    fn g_tensor_basics() {
        let g = euclid(3);
        let gt = g_curvature_like(&g);
        // G(e1, e2)e1 = e2
        assert_eq!(*gt.get(&[1, 0, 1, 0]), 1.0);
        assert_eq!(*gt.get(&[0, 0, 1, 0]), 0.0);
        for i in 0..3 {
            for z in 0..3 {
                assert_eq!(*gt.get(&[i, 1, 1, z]), 0.0);
            }
        }
        // tr(X ↦ G(X,Y)Z) = (1 − n) g
        let c = gt.contract(0, 1).unwrap();
        for ij in multi_indices(3, 2) {
            assert_eq!(*c.get(&ij), -2.0 * g.get(&ij));
        }
    }

    #[test]
    fn constant_curvature_algebra() {
        // R = K G is the model of constant curvature
        let n = 4;
        let k = 0.7;
        let g = euclid(n);
        let r = g_curvature_like(&g).scale(k);
        let t = SpecialTensors::compute(&r, &g, &inv(n)).unwrap();
        assert_relative_eq!(t.scalar, k * (n * (n - 1)) as f64, epsilon = 1e-14);
        assert!(t.concircular.max_abs() < 1e-14);
        assert!(t.projective.max_abs() < 1e-14);
        assert!(t.m_projective.max_abs() < 1e-14);
        let rl = lowered(&r, &g, &inv(n)).unwrap();
        let a = g.scale(k.sqrt());
        assert!(semi_isotropic_residual(&rl, &a).unwrap() < 1e-14);
        let mut bad = g.clone();
        bad.set(&[0, 1], 0.5);
        assert!(matches!(
            semi_isotropic_residual(&rl, &bad),
            Err(SpecialError::AsymmetricA(_))
        ));
    }
}
