//! Finite-difference oracle.
//!
//! An independent differentiation path used to cross-check the jet engine.
//! Derivatives of the metric come from central differences of plain `f64`
//! evaluations of `F`; curvature is estimated from difference quotients of
//! connection coefficients sampled at neighbouring points. Nothing here is
//! used on the classification path.

use thiserror::Error;

use crate::cartan::{ConnectionData, EngineError};
use crate::dsl::DomainError;
use crate::linalg;
use crate::metric::MetricSpec;
use crate::scalar::Scalar;
use crate::tensor::{ComponentTensor, TangentPoint, Variance};

use Variance::{Lower as L, Upper as U};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("invalid step {0}: need 0 < h ≤ 1e-2")]
    BadStep(f64),
    #[error("derivative order {0} above 4")]
    OrderTooHigh(usize),
    #[error("stencil point inadmissible: {0}")]
    Domain(#[from] DomainError),
    #[error("engine failed at a stencil point: {0}")]
    Engine(#[from] EngineError),
    #[error("metric is singular at a stencil point")]
    Singular,
}

/// Central second-order differences with optional Richardson extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDConfig {
    pub step: f64,
    pub richardson_levels: usize,
}

impl Default for FDConfig {
    fn default() -> Self {
        FDConfig {
            step: 1e-3,
            richardson_levels: 1,
        }
    }
}

impl FDConfig {
    pub fn new(step: f64, richardson_levels: usize) -> Result<Self, FdError> {
        if !(step > 0.0 && step <= 1e-2) {
            return Err(FdError::BadStep(step));
        }
        Ok(FDConfig {
            step,
            richardson_levels,
        })
    }
}

/// A difference estimate with the magnitude of its last Richardson correction.
#[derive(Debug, Clone, PartialEq)]
pub struct FdEstimate {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
}

/// `(offset in steps, weight)` of the central stencil for a `k`-th derivative.
fn stencil(k: usize) -> &'static [(f64, f64)] {
    match k {
        0 => &[(0.0, 1.0)],
        1 => &[(1.0, 0.5), (-1.0, -0.5)],
        2 => &[(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)],
        3 => &[(2.0, 0.5), (1.0, -1.0), (-1.0, 1.0), (-2.0, -0.5)],
        _ => &[(2.0, 1.0), (1.0, -4.0), (0.0, 6.0), (-1.0, -4.0), (-2.0, 1.0)],
    }
}

fn raw_difference<F>(f: &F, z: &[f64], counts: &[usize], h: f64) -> Result<Vec<f64>, FdError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, FdError>,
{
    let active: Vec<(usize, usize)> = counts.iter().copied().enumerate().filter(|(_, c)| *c > 0).collect();
    let total: usize = counts.iter().sum();
    let mut acc: Option<Vec<f64>> = None;
    let mut pick = vec![0usize; active.len()];
    loop {
        let mut zz = z.to_vec();
        let mut w = 1.0;
        for (slot, &(var, c)) in active.iter().enumerate() {
            let (off, wt) = stencil(c)[pick[slot]];
            zz[var] += off * h;
            w *= wt;
        }
        let v = f(&zz)?;
        let acc = acc.get_or_insert_with(|| vec![0.0; v.len()]);
        acc.iter_mut().zip(&v).for_each(|(a, b)| *a += w * b);
        // advance the mixed-radix counter over stencil points
        let mut s = 0;
        while s < active.len() {
            pick[s] += 1;
            if pick[s] < stencil(active[s].1).len() {
                break;
            }
            pick[s] = 0;
            s += 1;
        }
        if s == active.len() {
            break;
        }
    }
    let scale = h.powi(total as i32);
    Ok(acc.expect("non-empty stencil").into_iter().map(|a| a / scale).collect())
}

/// Mixed partial `∂^counts f` of a vector-valued field at `z`.
///
/// `counts[v]` is the differentiation order in variable `v`; the total must not
/// exceed 4.
pub fn fd_partial_vec<F>(f: &F, z: &[f64], counts: &[usize], cfg: &FDConfig) -> Result<FdEstimate, FdError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, FdError>,
{
    let total: usize = counts.iter().sum();
    if total > 4 {
        return Err(FdError::OrderTooHigh(total));
    }
    let levels = cfg.richardson_levels.max(1);
    let mut table: Vec<Vec<Vec<f64>>> = Vec::new();
    for i in 0..=levels {
        let mut row = vec![raw_difference(f, z, counts, cfg.step / 2f64.powi(i as i32))?];
        for j in 1..=i {
            let factor = 4f64.powi(j as i32) - 1.0;
            let prev = &table[i - 1][j - 1];
            let cur = &row[j - 1];
            let next = cur.iter().zip(prev).map(|(c, p)| c + (c - p) / factor).collect();
            row.push(next);
        }
        table.push(row);
    }
    let (value, previous) = if cfg.richardson_levels == 0 {
        (table[0][0].clone(), table[1][0].clone())
    } else {
        let l = cfg.richardson_levels;
        (table[l][l].clone(), table[l][l - 1].clone())
    };
    let error = value.iter().zip(&previous).map(|(a, b)| (a - b).abs()).collect();
    Ok(FdEstimate { value, error })
}

/// Scalar form of [`fd_partial_vec`], returning `(value, error estimate)`.
pub fn fd_partial<F>(f: &F, z: &[f64], counts: &[usize], cfg: &FDConfig) -> Result<(f64, f64), FdError>
where
    F: Fn(&[f64]) -> Result<f64, FdError>,
{
    let wrapped = |zz: &[f64]| f(zz).map(|v| vec![v]);
    let est = fd_partial_vec(&wrapped, z, counts, cfg)?;
    Ok((est.value[0], est.error[0]))
}

fn unit(nvars: usize, v: usize, k: usize) -> Vec<usize> {
    let mut c = vec![0; nvars];
    c[v] += k;
    c
}

fn pair(nvars: usize, a: usize, b: usize) -> Vec<usize> {
    let mut c = vec![0; nvars];
    c[a] += 1;
    c[b] += 1;
    c
}

/// Derivatives of the metric from plain evaluations of `F`, variables
/// `z = (x, y)` as in the engine.
pub struct MetricOracle<'a> {
    spec: &'a MetricSpec,
    cfg: FDConfig,
}

impl<'a> MetricOracle<'a> {
    pub fn new(spec: &'a MetricSpec, cfg: FDConfig) -> Self {
        MetricOracle { spec, cfg }
    }

    fn n(&self) -> usize {
        self.spec.dim()
    }

    /// `F²` from a plain evaluation of `F`.
    pub fn energy(&self, z: &[f64]) -> Result<f64, FdError> {
        let n = self.n();
        let f = self.spec.eval::<f64>(&z[..n], &z[n..])?;
        Ok(f * f)
    }

    /// Oracle for quantities that need third derivatives of `F²`. They are
    /// differenced twice, so both levels use a 10× wider step (capped at 1e-2)
    /// to keep amplified roundoff below the truncation error.
    fn wide(&self) -> MetricOracle<'a> {
        MetricOracle {
            spec: self.spec,
            cfg: FDConfig {
                step: (10.0 * self.cfg.step).min(1e-2),
                ..self.cfg
            },
        }
    }

    fn energy_partial(&self, z: &[f64], counts: &[usize]) -> Result<f64, FdError> {
        Ok(fd_partial(&|zz: &[f64]| self.energy(zz), z, counts, &self.cfg)?.0)
    }

    /// `g_ij = ½ ∂̇_i ∂̇_j F²`, row-major.
    pub fn fundamental_tensor(&self, z: &[f64]) -> Result<Vec<f64>, FdError> {
        let n = self.n();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * self.energy_partial(z, &pair(2 * n, n + i, n + j))?;
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        Ok(g)
    }

    fn inverse(&self, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>), FdError> {
        let g = self.fundamental_tensor(z)?;
        let inv = linalg::invert(&g, self.n(), 1e-12).ok_or(FdError::Singular)?;
        Ok((g, inv))
    }

    /// `G^i = ¼ g^il (y^k ∂_k ∂̇_l F² − ∂_l F²)`.
    pub fn spray(&self, z: &[f64]) -> Result<Vec<f64>, FdError> {
        let n = self.n();
        let (_, inv) = self.inverse(z)?;
        let mut bracket = vec![0.0; n];
        for (l, b) in bracket.iter_mut().enumerate() {
            let mut acc = -self.energy_partial(z, &unit(2 * n, l, 1))?;
            for k in 0..n {
                acc += z[n + k] * self.energy_partial(z, &pair(2 * n, k, n + l))?;
            }
            *b = acc;
        }
        Ok((0..n)
            .map(|i| 0.25 * (0..n).map(|l| inv[i * n + l] * bracket[l]).sum::<f64>())
            .collect())
    }

    /// `N^i_j = ∂̇_j G^i`, row-major.
    pub fn nonlinear(&self, z: &[f64]) -> Result<Vec<f64>, FdError> {
        let n = self.n();
        let wide = self.wide();
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            let d = fd_partial_vec(&|zz: &[f64]| wide.spray(zz), z, &unit(2 * n, n + j, 1), &wide.cfg)?;
            for i in 0..n {
                out[i * n + j] = d.value[i];
            }
        }
        Ok(out)
    }

    fn metric_derivative(&self, z: &[f64], var: usize) -> Result<Vec<f64>, FdError> {
        let n = self.n();
        let wide = self.wide();
        Ok(fd_partial_vec(&|zz: &[f64]| wide.fundamental_tensor(zz), z, &unit(2 * n, var, 1), &wide.cfg)?.value)
    }

    /// Cartan tensor `C^i_jk = ½ g^il ∂̇_k g_jl`, indexed `[i][j][k]`.
    pub fn cartan(&self, z: &[f64]) -> Result<Vec<f64>, FdError> {
        let n = self.n();
        let (_, inv) = self.inverse(z)?;
        let dy: Vec<Vec<f64>> = (0..n).map(|k| self.metric_derivative(z, n + k)).collect::<Result<_, _>>()?;
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[(i * n + j) * n + k] =
                        0.5 * (0..n).map(|l| inv[i * n + l] * dy[k][j * n + l]).sum::<f64>();
                }
            }
        }
        Ok(out)
    }

    /// `F^i_jk = ½ g^il (δ_j g_lk + δ_k g_jl − δ_l g_jk)`, indexed `[i][j][k]`.
    pub fn coefficients(&self, z: &[f64]) -> Result<Vec<f64>, FdError> {
        let n = self.n();
        let (_, inv) = self.inverse(z)?;
        let nl = self.nonlinear(z)?;
        let dx: Vec<Vec<f64>> = (0..n).map(|k| self.metric_derivative(z, k)).collect::<Result<_, _>>()?;
        let dy: Vec<Vec<f64>> = (0..n).map(|k| self.metric_derivative(z, n + k)).collect::<Result<_, _>>()?;
        // δ_j g_ab
        let dg = |j: usize, a: usize, b: usize| {
            dx[j][a * n + b] - (0..n).map(|m| nl[m * n + j] * dy[m][a * n + b]).sum::<f64>()
        };
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[(i * n + j) * n + k] = 0.5
                        * (0..n)
                            .map(|l| inv[i * n + l] * (dg(j, l, k) + dg(k, j, l) - dg(l, j, k)))
                            .sum::<f64>();
                }
            }
        }
        Ok(out)
    }
}

/// Connection coefficients produced by the engine at a neighbouring point,
/// flattened as `[F (n³), C (n³), N (n²)]`.
fn connection_sample(spec: &MetricSpec, z: &[f64]) -> Result<Vec<f64>, FdError> {
    let p = TangentPoint::from_coords(z).map_err(EngineError::from)?;
    let conn = ConnectionData::with_order(spec, &p, 3)?;
    let mut out: Vec<f64> = conn.coeffs.data().iter().map(|j| j.value()).collect();
    out.extend(conn.cartan.data().iter().map(|j| j.value()));
    out.extend(conn.nonlinear.data().iter().map(|j| j.value()));
    Ok(out)
}

/// Curvature estimates from finite-difference commutators.
#[derive(Debug, Clone)]
pub struct FdCurvature {
    /// h-curvature, same layout and sign as the engine's `R`.
    pub r: ComponentTensor<f64>,
    /// hv-curvature, same layout and sign as the engine's `P`.
    pub p: ComponentTensor<f64>,
    pub ric: ComponentTensor<f64>,
    pub scalar: f64,
}

/// Estimates `R` and `P` at `p` from the commutators `[δ_k, δ_l]` and
/// `[δ_k, ∂̇_l]` acting on the coordinate sections, with connection
/// coefficients sampled from `spec` at neighbouring points.
pub fn fd_covariant_commutator(
    spec: &MetricSpec,
    p: &TangentPoint<f64>,
    cfg: &FDConfig,
) -> Result<FdCurvature, FdError> {
    let n = spec.dim();
    let z = p.coords();
    let sample = |zz: &[f64]| connection_sample(spec, zz);
    let base = sample(&z)?;
    let d: Vec<Vec<f64>> = (0..2 * n)
        .map(|v| fd_partial_vec(&sample, &z, &unit(2 * n, v, 1), cfg).map(|e| e.value))
        .collect::<Result<_, _>>()?;
    let n3 = n * n * n;
    let fi = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let f = |i, j, k| base[fi(i, j, k)];
    let c = |i, j, k| base[n3 + fi(i, j, k)];
    let nl = |i: usize, j: usize| base[2 * n3 + i * n + j];
    // ∂_v of a flattened entry, and δ_k = ∂_k − N^m_k ∂̇_m
    let delta = |idx: usize, k: usize| d[k][idx] - (0..n).map(|m| nl(m, k) * d[n + m][idx]).sum::<f64>();
    let vdot = |idx: usize, l: usize| d[n + l][idx];

    let rhat = |m: usize, k: usize, l: usize| {
        delta(2 * n3 + m * n + l, k) - delta(2 * n3 + m * n + k, l)
    };
    // standard-sign components K(δ_k, δ_l)∂_j and K(δ_k, ∂̇_l)∂_j
    let r_std = |i: usize, j: usize, k: usize, l: usize| {
        let mut acc = delta(fi(i, j, l), k) - delta(fi(i, j, k), l);
        for m in 0..n {
            acc += f(m, j, l) * f(i, m, k) - f(m, j, k) * f(i, m, l) + c(i, j, m) * rhat(m, k, l);
        }
        acc
    };
    let p_std = |i: usize, j: usize, k: usize, l: usize| {
        let mut acc = delta(n3 + fi(i, j, l), k) - vdot(fi(i, j, k), l);
        for m in 0..n {
            acc += c(m, j, l) * f(i, m, k) - f(m, j, k) * c(i, m, l) - vdot(2 * n3 + m * n + k, l) * c(i, j, m);
        }
        acc
    };
    let r = ComponentTensor::from_fn(n, vec![U, L, L, L], |iabc| -r_std(iabc[0], iabc[3], iabc[1], iabc[2]));
    let pp = ComponentTensor::from_fn(n, vec![U, L, L, L], |iabc| -p_std(iabc[0], iabc[3], iabc[1], iabc[2]));
    let ric = r.contract(0, 2).expect("valid contraction");
    let oracle = MetricOracle::new(spec, *cfg);
    let (_, inv) = oracle.inverse(&z)?;
    let scalar = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| inv[a * n + b] * ric.get(&[a, b]))
        .sum();
    Ok(FdCurvature { r, p: pp, ric, scalar })
}

/// Largest componentwise error relative to the largest reference component
/// (normwise relative error in the max norm).
pub fn relative_error(estimate: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = estimate
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
