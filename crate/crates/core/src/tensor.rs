//! Point tensors in a coordinate basis.
//!
//! A [`ComponentTensor`] stores `dim^rank` components in row-major order with
//! one [`Variance`] per slot. Elements are generic: plain reals for values at
//! a point, [`Jet`](crate::jet::Jet)s when the tensor field must still be
//! differentiated.

use num_traits::{Float, Zero};
use thiserror::Error;

use crate::linalg;
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Upper,
    Lower,
}

impl Variance {
    pub fn flip(self) -> Variance {
        match self {
            Variance::Upper => Variance::Lower,
            Variance::Lower => Variance::Upper,
        }
    }

    pub fn code(self) -> char {
        match self {
            Variance::Upper => 'u',
            Variance::Lower => 'l',
        }
    }
}

/// Declared (anti)symmetry between two slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("cannot contract slot {0} with slot {1}: need one upper and one lower index")]
    VarianceMismatch(usize, usize),
    #[error("tensor shapes differ")]
    ShapeMismatch,
    #[error("declared symmetry {symmetry:?} violated by {defect:e}")]
    SymmetryViolated { symmetry: Symmetry, defect: f64 },
    #[error("metric is singular")]
    SingularMetric,
    #[error("metric is not positive definite (eigenvalues {eigenvalues:?})")]
    NotPositiveDefinite { eigenvalues: Vec<f64> },
    #[error("operator is not self-adjoint (defect {0:e})")]
    NotSelfAdjoint(f64),
    #[error("direction vector is zero")]
    ZeroDirection,
    #[error("x and y have different lengths")]
    DimensionMismatch,
}

/// A point `(x, y)` of the slit tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoint<S> {
    pub x: Vec<S>,
    pub y: Vec<S>,
}

impl<S: Real> TangentPoint<S> {
    pub fn new(x: Vec<S>, y: Vec<S>) -> Result<Self, TensorError> {
        if x.len() != y.len() {
            return Err(TensorError::DimensionMismatch);
        }
        if y.iter().all(|v| v.is_zero()) {
            return Err(TensorError::ZeroDirection);
        }
        Ok(TangentPoint { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Coordinates `(x, y)` concatenated, the jet variable order.
    pub fn coords(&self) -> Vec<S> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn from_coords(z: &[S]) -> Result<Self, TensorError> {
        let n = z.len() / 2;
        Self::new(z[..n].to_vec(), z[n..].to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTensor<T> {
    dim: usize,
    variance: Vec<Variance>,
    data: Vec<T>,
    symmetries: Vec<Symmetry>,
}

/// Iterates all multi-indices of `rank` slots over `0..dim` in row-major order.
pub fn multi_indices(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for slot in (0..rank).rev() {
            idx[slot] = flat % dim;
            flat /= dim;
        }
        idx
    })
}

impl<T: Clone> ComponentTensor<T> {
    pub fn new(dim: usize, variance: Vec<Variance>, data: Vec<T>) -> Self {
        assert_eq!(
            data.len(),
            dim.pow(variance.len() as u32),
            "data length must be dim^rank"
        );
        ComponentTensor {
            dim,
            variance,
            data,
            symmetries: Vec::new(),
        }
    }

    pub fn from_fn(dim: usize, variance: Vec<Variance>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let data = multi_indices(dim, variance.len()).map(|i| f(&i)).collect();
        Self::new(dim, variance, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn variance_code(&self) -> String {
        self.variance.iter().map(|v| v.code()).collect()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn symmetries(&self) -> &[Symmetry] {
        &self.symmetries
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let k = self.flat_index(idx);
        self.data[k] = v;
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> ComponentTensor<U> {
        ComponentTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self.data.iter().map(f).collect(),
            symmetries: self.symmetries.clone(),
        }
    }

    /// Reorders slots: slot `s` of the result is slot `perm[s]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rank());
        let variance = perm.iter().map(|&p| self.variance[p]).collect();
        let mut src = vec![0; self.rank()];
        let data = multi_indices(self.dim, self.rank())
            .map(|idx| {
                for (s, &p) in perm.iter().enumerate() {
                    src[p] = idx[s];
                }
                self.get(&src).clone()
            })
            .collect();
        ComponentTensor::new(self.dim, variance, data)
    }

    /// Fixes the first slot at `k`, as used for derivative stacks.
    pub fn slice_first(&self, k: usize) -> Self {
        let block = self.data.len() / self.dim;
        ComponentTensor::new(
            self.dim,
            self.variance[1..].to_vec(),
            self.data[k * block..(k + 1) * block].to_vec(),
        )
    }
}

impl<T: Scalar> ComponentTensor<T> {
    fn zip_map(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self, TensorError> {
        if self.dim != other.dim || self.variance != other.variance {
            return Err(TensorError::ShapeMismatch);
        }
        Ok(ComponentTensor::new(
            self.dim,
            self.variance.clone(),
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip_map(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip_map(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, c: T::Real) -> Self {
        let mut out = self.map(|v| v.clone() * v.lift(c));
        out.symmetries = self.symmetries.clone();
        out
    }

    /// Multiplies every component by the scalar `s`.
    pub fn scale_by(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn zeros_like(&self) -> Self {
        self.map(|v| v.zero_like())
    }

    /// Tensor product, slots of `self` first.
    pub fn outer(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut variance = self.variance.clone();
        variance.extend_from_slice(&other.variance);
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for a in &self.data {
            for b in &other.data {
                data.push(a.clone() * b.clone());
            }
        }
        ComponentTensor::new(self.dim, variance, data)
    }

    /// Einstein summation over an upper and a lower slot.
    pub fn contract(&self, slot_a: usize, slot_b: usize) -> Result<Self, TensorError> {
        let (va, vb) = (self.variance[slot_a], self.variance[slot_b]);
        if slot_a == slot_b || va == vb {
            return Err(TensorError::VarianceMismatch(slot_a, slot_b));
        }
        self.trace_unchecked(slot_a, slot_b)
    }

    fn trace_unchecked(&self, slot_a: usize, slot_b: usize) -> Result<Self, TensorError> {
        let keep: Vec<usize> = (0..self.rank())
            .filter(|&s| s != slot_a && s != slot_b)
            .collect();
        let variance: Vec<Variance> = keep.iter().map(|&s| self.variance[s]).collect();
        let mut src = vec![0; self.rank()];
        let data = multi_indices(self.dim, keep.len())
            .map(|idx| {
                for (k, &s) in keep.iter().enumerate() {
                    src[s] = idx[k];
                }
                let mut acc: Option<T> = None;
                for i in 0..self.dim {
                    src[slot_a] = i;
                    src[slot_b] = i;
                    let v = self.get(&src).clone();
                    acc = Some(match acc {
                        None => v,
                        Some(a) => a + v,
                    });
                }
                acc.unwrap()
            })
            .collect();
        Ok(ComponentTensor::new(self.dim, variance, data))
    }

    /// Flips the variance of `slot` with the metric (`g` lowers, `g_inv` raises).
    pub fn raise_lower(
        &self,
        slot: usize,
        g: &ComponentTensor<T>,
        g_inv: &ComponentTensor<T>,
    ) -> Result<Self, TensorError> {
        let m = match self.variance[slot] {
            Variance::Lower => g_inv,
            Variance::Upper => g,
        };
        if m.rank() != 2 || m.dim != self.dim {
            return Err(TensorError::ShapeMismatch);
        }
        let mut variance = self.variance.clone();
        variance[slot] = variance[slot].flip();
        let mut src = vec![0; self.rank()];
        let data = multi_indices(self.dim, self.rank())
            .map(|idx| {
                src.copy_from_slice(&idx);
                let mut acc: Option<T> = None;
                for b in 0..self.dim {
                    src[slot] = b;
                    let term = m.get(&[idx[slot], b]).clone() * self.get(&src).clone();
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a + term,
                    });
                }
                acc.unwrap()
            })
            .collect();
        Ok(ComponentTensor::new(self.dim, variance, data))
    }

    /// Point values of every component.
    pub fn values(&self) -> ComponentTensor<T::Real> {
        ComponentTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self.data.iter().map(|v| v.value()).collect(),
            symmetries: self.symmetries.clone(),
        }
    }

    /// Largest absolute component value.
    pub fn max_abs(&self) -> T::Real {
        self.data
            .iter()
            .fold(T::Real::zero(), |m, v| Float::max(m, v.value().abs()))
    }

    /// Largest |T(.., i, .., j, ..) ∓ T(.., j, .., i, ..)| over all indices.
    pub fn symmetry_defect(&self, sym: Symmetry) -> T::Real {
        let (a, b, sign) = match sym {
            Symmetry::Symmetric(a, b) => (a, b, -T::Real::one()),
            Symmetry::Antisymmetric(a, b) => (a, b, T::Real::one()),
        };
        let mut worst = T::Real::zero();
        for idx in multi_indices(self.dim, self.rank()) {
            let mut sw = idx.clone();
            sw.swap(a, b);
            let d = self.get(&idx).value() + sign * self.get(&sw).value();
            worst = Float::max(worst, d.abs());
        }
        worst
    }

    /// Attaches symmetry metadata after checking it holds to `tol` (relative to the largest component).
    pub fn with_symmetries(mut self, syms: &[Symmetry], tol: f64) -> Result<Self, TensorError> {
        let scale = Float::max(T::Real::one(), self.max_abs()).to_f64_lossy();
        for &s in syms {
            let defect = self.symmetry_defect(s).to_f64_lossy();
            if defect > tol * scale {
                return Err(TensorError::SymmetryViolated {
                    symmetry: s,
                    defect,
                });
            }
        }
        self.symmetries = syms.to_vec();
        Ok(self)
    }
}

use num_traits::One;

/// Largest |a - b| over matching components.
pub fn max_abs_diff<S: Real>(a: &ComponentTensor<S>, b: &ComponentTensor<S>) -> S {
    assert_eq!(a.data().len(), b.data().len());
    a.data()
        .iter()
        .zip(b.data())
        .fold(S::zero(), |m, (x, y)| Float::max(m, (*x - *y).abs()))
}

/// A `g`-orthonormal frame at a point, used for coordinate-free norms.
#[derive(Debug, Clone)]
pub struct Frame<S> {
    dim: usize,
    /// Applied to upper slots: Lᵀ.
    up: Vec<S>,
    /// Applied to lower slots: L⁻¹.
    down: Vec<S>,
}

impl<S: Real> Frame<S> {
    /// Builds the frame from the Cholesky factor `g = L Lᵀ`.
    pub fn orthonormal(g: &ComponentTensor<S>) -> Result<Self, TensorError> {
        let n = g.dim();
        let l = linalg::cholesky(g.data(), n).ok_or_else(|| {
            let (eig, _) = linalg::symmetric_eigen(g.data(), n);
            TensorError::NotPositiveDefinite {
                eigenvalues: eig.iter().map(|v| v.to_f64_lossy()).collect(),
            }
        })?;
        Ok(Frame {
            dim: n,
            up: linalg::transpose(&l, n),
            down: linalg::invert_lower(&l, n),
        })
    }

    /// Components of `t` in the orthonormal frame.
    pub fn components(&self, t: &ComponentTensor<S>) -> ComponentTensor<S> {
        let n = self.dim;
        let mut cur = t.clone();
        for slot in 0..t.rank() {
            let m = match t.variance()[slot] {
                Variance::Upper => &self.up,
                Variance::Lower => &self.down,
            };
            let mut src = vec![0; t.rank()];
            let data = multi_indices(n, t.rank())
                .map(|idx| {
                    src.copy_from_slice(&idx);
                    let mut acc = S::zero();
                    for i in 0..n {
                        src[slot] = i;
                        acc = acc + m[idx[slot] * n + i] * *cur.get(&src);
                    }
                    acc
                })
                .collect();
            cur = ComponentTensor::new(n, t.variance().to_vec(), data);
        }
        cur
    }

    pub fn inner(&self, a: &ComponentTensor<S>, b: &ComponentTensor<S>) -> S {
        let fa = self.components(a);
        let fb = self.components(b);
        fa.data()
            .iter()
            .zip(fb.data())
            .fold(S::zero(), |acc, (x, y)| acc + *x * *y)
    }

    pub fn norm(&self, a: &ComponentTensor<S>) -> S {
        self.inner(a, a).sqrt()
    }
}

/// Real eigenvalues (ascending) of a `g`-self-adjoint (1,1) operator stored as `[Upper, Lower]`.
pub fn sym_eigenvalues<S: Real>(
    op: &ComponentTensor<S>,
    g: &ComponentTensor<S>,
) -> Result<Vec<S>, TensorError> {
    assert_eq!(op.variance(), &[Variance::Upper, Variance::Lower]);
    let n = op.dim();
    let lowered = linalg::matmul(g.data(), op.data(), n);
    let scale = Float::max(S::one(), linalg::max_abs(&lowered));
    let defect = linalg::max_abs(
        &lowered
            .iter()
            .zip(linalg::transpose(&lowered, n))
            .map(|(a, b)| *a - b)
            .collect::<Vec<_>>(),
    );
    if defect > S::of(1e-8) * scale {
        return Err(TensorError::NotSelfAdjoint(defect.to_f64_lossy()));
    }
    let frame = Frame::orthonormal(g)?;
    let m = frame.components(op);
    let mt = linalg::transpose(m.data(), n);
    let sym: Vec<S> = m
        .data()
        .iter()
        .zip(&mt)
        .map(|(a, b)| (*a + *b) * S::of(0.5))
        .collect();
    Ok(linalg::symmetric_eigen(&sym, n).0)
}

/// A recovered recurrence form.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Fit<S> {
    pub form: Vec<S>,
    pub residual: S,
    pub threshold: S,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("base tensor vanishes (norm {norm:e})")]
    ZeroTensor { norm: f64 },
    #[error("no rank-1 fit: residual {residual:e} above {threshold:e}")]
    NoFit {
        residual: f64,
        threshold: f64,
        form: Vec<f64>,
    },
}

/// Fits `D_k ≈ A_k T` for every direction `k`.
///
/// `A_k = ⟨D_k, T⟩ / ⟨T, T⟩` in the frame inner product; accepted when
/// `max_k ‖D_k − A_k T‖ ≤ tol (1 + ‖T‖ max_k |A_k|)`.
pub fn rank1_fit<S: Real>(
    derivatives: &[ComponentTensor<S>],
    base: &ComponentTensor<S>,
    frame: &Frame<S>,
    tol: S,
) -> Result<Rank1Fit<S>, FitError>
where
    S: Scalar<Real = S>,
{
    let tt = frame.inner(base, base);
    let norm_t = Float::sqrt(tt);
    if norm_t <= tol {
        return Err(FitError::ZeroTensor {
            norm: norm_t.to_f64_lossy(),
        });
    }
    let form: Vec<S> = derivatives
        .iter()
        .map(|d| frame.inner(d, base) / tt)
        .collect();
    let mut residual = S::zero();
    for (d, &a) in derivatives.iter().zip(&form) {
        let r = d.sub(&base.scale(a)).expect("derivative shape matches base");
        residual = Float::max(residual, frame.norm(&r));
    }
    let amax = form.iter().fold(S::zero(), |m, a| Float::max(m, Float::abs(*a)));
    let threshold = tol * (S::one() + norm_t * amax);
    if residual <= threshold {
        Ok(Rank1Fit {
            form,
            residual,
            threshold,
        })
    } else {
        Err(FitError::NoFit {
            residual: residual.to_f64_lossy(),
            threshold: threshold.to_f64_lossy(),
            form: form.iter().map(|v| v.to_f64_lossy()).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use Variance::{Lower, Upper};

    fn identity(n: usize) -> ComponentTensor<f64> {
        ComponentTensor::from_fn(n, vec![Upper, Lower], |i| if i[0] == i[1] { 1.0 } else { 0.0 })
    }

    fn euclid(n: usize) -> ComponentTensor<f64> {
        ComponentTensor::from_fn(n, vec![Lower, Lower], |i| if i[0] == i[1] { 1.0 } else { 0.0 })
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> ComponentTensor<f64> {
        let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut m = linalg::matmul(&a, &linalg::transpose(&a, n), n);
        for i in 0..n {
            m[i * n + i] += 0.5;
        }
        ComponentTensor::new(n, vec![Lower, Lower], m)
    }

    fn inverse(g: &ComponentTensor<f64>) -> ComponentTensor<f64> {
        let n = g.dim();
        ComponentTensor::new(n, vec![Upper, Upper], linalg::invert(g.data(), n, 1e-14).unwrap())
    }

    fn random_tensor(rng: &mut ChaCha8Rng, n: usize, variance: Vec<Variance>) -> ComponentTensor<f64> {
        ComponentTensor::from_fn(n, variance, |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn trace_of_identity() {
        let t = identity(3).contract(0, 1).unwrap();
        assert_eq!(t.rank(), 0);
        assert_eq!(t.data()[0], 3.0);
        assert_eq!(
            euclid(3).contract(0, 1),
            Err(TensorError::VarianceMismatch(0, 1))
        );
    }

    #[test]
    fn contraction_of_curvature_like_tensor() {
        // G(X,Y)Z = g(X,Z)Y - g(Y,Z)X, slots [out, X, Y, Z]; trace over (out, X) gives (1-n) g
        let n = 3;
        let g = euclid(n);
        let gt = ComponentTensor::from_fn(n, vec![Upper, Lower, Lower, Lower], |i| {
            let (o, x, y, z) = (i[0], i[1], i[2], i[3]);
            g.get(&[x, z]) * if o == y { 1.0 } else { 0.0 }
                - g.get(&[y, z]) * if o == x { 1.0 } else { 0.0 }
        });
        let c = gt.contract(0, 1).unwrap();
        for idx in multi_indices(n, 2) {
            assert_eq!(*c.get(&idx), (1.0 - n as f64) * g.get(&idx));
        }
        let zero = gt.zeros_like().contract(0, 1).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn raising_metric_gives_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_spd(&mut rng, 4);
        let gi = inverse(&g);
        let raised = g.raise_lower(0, &g, &gi).unwrap();
        assert_eq!(raised.variance(), &[Upper, Lower]);
        for idx in multi_indices(4, 2) {
            let expect = if idx[0] == idx[1] { 1.0 } else { 0.0 };
            assert_relative_eq!(*raised.get(&idx), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn lower_raise_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_spd(&mut rng, 3);
        let gi = inverse(&g);
        let t = random_tensor(&mut rng, 3, vec![Upper, Lower, Lower]);
        let back = t
            .raise_lower(0, &g, &gi)
            .unwrap()
            .raise_lower(0, &g, &gi)
            .unwrap();
        let scale = t.max_abs();
        assert!(max_abs_diff(&back, &t) <= 1e-12 * scale);
    }

    #[test]
    fn eigenvalues_of_identity_and_zero() {
        let g = euclid(3);
        assert_eq!(sym_eigenvalues(&identity(3), &g).unwrap(), vec![1.0; 3]);
        assert_eq!(
            sym_eigenvalues(&identity(3).zeros_like(), &g).unwrap(),
            vec![0.0; 3]
        );
        let skew = ComponentTensor::new(
            3,
            vec![Upper, Lower],
            vec![0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        );
        assert!(matches!(
            sym_eigenvalues(&skew, &g),
            Err(TensorError::NotSelfAdjoint(_))
        ));
    }

    #[test]
    fn projector_eigenvalues() {
        // α · (g-orthogonal projector onto span of r random vectors)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 3..=4 {
            for r in 1..=n {
                let g = random_spd(&mut rng, n);
                let alpha = rng.random_range(-3.0..3.0);
                let op = planted_projector(&mut rng, &g, r, alpha);
                let eig = sym_eigenvalues(&op, &g).unwrap();
                let zeros = eig.iter().filter(|v| v.abs() < 1e-9).count();
                let alphas = eig.iter().filter(|v| (*v - alpha).abs() < 1e-9).count();
                assert_eq!((zeros, alphas), (n - r, r), "{eig:?} vs α={alpha}");
            }
        }
    }

    /// α P where P projects g-orthogonally onto a random r-dimensional subspace.
    pub(crate) fn planted_projector(
        rng: &mut ChaCha8Rng,
        g: &ComponentTensor<f64>,
        r: usize,
        alpha: f64,
    ) -> ComponentTensor<f64> {
        let n = g.dim();
        let frame_l = linalg::cholesky(g.data(), n).unwrap();
        let e = linalg::transpose(&linalg::invert_lower(&frame_l, n), n);
        // random orthonormal basis in frame coordinates via Gram-Schmidt
        let mut basis: Vec<Vec<f64>> = Vec::new();
        while basis.len() < r {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                v.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-3 {
                basis.push(v.into_iter().map(|a| a / norm).collect());
            }
        }
        // frame projector Q = Σ b bᵀ; coordinate operator = E Q E⁻¹ with E⁻¹ = Lᵀ
        let mut q = vec![0.0; n * n];
        for b in &basis {
            for i in 0..n {
                for j in 0..n {
                    q[i * n + j] += alpha * b[i] * b[j];
                }
            }
        }
        let op = linalg::matmul(&linalg::matmul(&e, &q, n), &linalg::transpose(&frame_l, n), n);
        ComponentTensor::new(n, vec![Upper, Lower], op)
    }

    #[test]
    fn rank1_fit_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_spd(&mut rng, 3);
        let frame = Frame::orthonormal(&g).unwrap();
        let t = random_tensor(&mut rng, 3, vec![Upper, Lower, Lower]);

        let zeros: Vec<_> = (0..3).map(|_| t.zeros_like()).collect();
        let fit = rank1_fit(&zeros, &t, &frame, 1e-7).unwrap();
        assert_eq!(fit.form, vec![0.0; 3]);

        let c = [0.5, -2.0, 3.25];
        let planted: Vec<_> = c.iter().map(|&ck| t.scale(ck)).collect();
        let fit = rank1_fit(&planted, &t, &frame, 1e-7).unwrap();
        for (a, b) in fit.form.iter().zip(c) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }

        // D_1 orthogonal to T with equal norm
        let mut other = random_tensor(&mut rng, 3, vec![Upper, Lower, Lower]);
        let proj = frame.inner(&other, &t) / frame.inner(&t, &t);
        other = other.sub(&t.scale(proj)).unwrap();
        other = other.scale(frame.norm(&t) / frame.norm(&other));
        let ds = vec![other, t.zeros_like(), t.zeros_like()];
        match rank1_fit(&ds, &t, &frame, 1e-7) {
            Err(FitError::NoFit { residual, .. }) => {
                assert_relative_eq!(residual, frame.norm(&t), max_relative = 1e-10)
            }
            other => panic!("expected NoFit, got {other:?}"),
        }

        assert!(matches!(
            rank1_fit(&zeros, &t.zeros_like(), &frame, 1e-7),
            Err(FitError::ZeroTensor { .. })
        ));
    }

    #[test]
    fn declared_symmetries_are_validated() {
        let g = euclid(3);
        assert!(g.clone().with_symmetries(&[Symmetry::Symmetric(0, 1)], 1e-9).is_ok());
        assert!(matches!(
            g.with_symmetries(&[Symmetry::Antisymmetric(0, 1)], 1e-9),
            Err(TensorError::SymmetryViolated { .. })
        ));
    }

    #[test]
    fn frame_norm_is_coordinate_free() {
        // Under a change of basis P, components transform, the frame norm does not.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 3;
        let g = random_spd(&mut rng, n);
        let t = random_tensor(&mut rng, n, vec![Upper, Lower]);
        let p: Vec<f64> = (0..n * n)
            .map(|k| if k % (n + 1) == 0 { 2.0 } else { rng.random_range(-0.3..0.3) })
            .collect();
        let pinv = linalg::invert(&p, n, 1e-14).unwrap();
        // g' = Pᵀ g P, t' = P⁻¹ t P
        let g2 = linalg::matmul(&linalg::transpose(&p, n), &linalg::matmul(g.data(), &p, n), n);
        let t2 = linalg::matmul(&pinv, &linalg::matmul(t.data(), &p, n), n);
        let f1 = Frame::orthonormal(&g).unwrap();
        let f2 = Frame::orthonormal(&ComponentTensor::new(n, vec![Lower, Lower], g2)).unwrap();
        let n1 = f1.norm(&t);
        let n2 = f2.norm(&ComponentTensor::new(n, vec![Upper, Lower], t2));
        assert_relative_eq!(n1, n2, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn contraction_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = vec![Upper, Lower, Lower, Lower];
            let s = random_tensor(&mut rng, 3, v.clone());
            let t = random_tensor(&mut rng, 3, v);
            let lhs = s.scale(a).add(&t.scale(b)).unwrap().contract(0, 2).unwrap();
            let rhs = s.contract(0, 2).unwrap().scale(a)
                .add(&t.contract(0, 2).unwrap().scale(b)).unwrap();
            let scale = lhs.max_abs().max(1.0);
            prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-12 * scale);
        }

        #[test]
        fn rank1_recovers_planted_form(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3 + (seed % 2) as usize;
            let g = random_spd(&mut rng, n);
            let frame = Frame::orthonormal(&g).unwrap();
            let t = random_tensor(&mut rng, n, vec![Upper, Lower, Lower, Lower]);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let ds: Vec<_> = a.iter().map(|&ak| t.scale(ak)).collect();
            let fit = rank1_fit(&ds, &t, &frame, 1e-7).unwrap();
            for (x, y) in fit.form.iter().zip(&a) {
                prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
            }
        }
    }
}
