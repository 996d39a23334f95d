//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients of a function of `nvars` variables
//! around a fixed expansion point, truncated at a total degree (`order`).
//! Coefficients are stored densely in graded-lexicographic monomial order, so
//! the coefficients of a lower-order truncation are a prefix of the array.
//! Products and quotients use precomputed pair tables shared by every jet
//! with the same variable count.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::scalar::{Real, Scalar};

/// Highest truncation order the monomial tables are built for.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("derivative of total order {requested} exceeds jet order {order}")]
    OrderExceeded { requested: usize, order: usize },
    #[error("multi-index has {got} entries, expected {expected}")]
    BadMultiIndex { got: usize, expected: usize },
}

/// Monomial bookkeeping for one variable count.
pub struct MonomialTable {
    nvars: usize,
    exps: Vec<Vec<u8>>,
    /// `degree_start[d]` = number of monomials of degree < d.
    degree_start: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// CSR layout: pairs (a, b) with exps[a] + exps[b] = exps[k] live in
    /// `pairs[pair_offsets[k]..pair_offsets[k + 1]]`.
    pair_offsets: Vec<usize>,
    pairs: Vec<(u32, u32)>,
    /// `raise[i][m]` = index of monomial m + e_i, or `u32::MAX`.
    raise: Vec<Vec<u32>>,
}

impl MonomialTable {
    fn build(nvars: usize) -> Self {
        let mut exps = Vec::new();
        let mut degree_start = vec![0];
        for d in 0..=MAX_ORDER {
            let mut cur = vec![0u8; nvars];
            push_degree(&mut exps, &mut cur, 0, d);
            degree_start.push(exps.len());
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

        let count = exps.len();
        let mut buckets: Vec<Vec<(u32, u32)>> = vec![Vec::new(); count];
        let mut sum = vec![0u8; nvars];
        for (a, ea) in exps.iter().enumerate() {
            let da: usize = ea.iter().map(|&v| v as usize).sum();
            let limit = degree_start[MAX_ORDER + 1 - da];
            for (b, eb) in exps[..limit].iter().enumerate() {
                for v in 0..nvars {
                    sum[v] = ea[v] + eb[v];
                }
                let k = index[&sum];
                buckets[k].push((a as u32, b as u32));
            }
        }
        let mut pair_offsets = Vec::with_capacity(count + 1);
        let mut pairs = Vec::new();
        pair_offsets.push(0);
        for bucket in buckets {
            pairs.extend(bucket);
            pair_offsets.push(pairs.len());
        }

        let raise = (0..nvars)
            .map(|i| {
                exps.iter()
                    .map(|e| {
                        let mut up = e.clone();
                        up[i] += 1;
                        index.get(&up).map_or(u32::MAX, |&k| k as u32)
                    })
                    .collect()
            })
            .collect();

        MonomialTable {
            nvars,
            exps,
            degree_start,
            index,
            pair_offsets,
            pairs,
            raise,
        }
    }

    /// Number of monomials of total degree ≤ `order`.
    pub fn count(&self, order: usize) -> usize {
        self.degree_start[order + 1]
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn exponents(&self, k: usize) -> &[u8] {
        &self.exps[k]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    fn pairs_of(&self, k: usize) -> &[(u32, u32)] {
        &self.pairs[self.pair_offsets[k]..self.pair_offsets[k + 1]]
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut [u8], var: usize, left: usize) {
    if var + 1 == cur.len() {
        cur[var] = left as u8;
        out.push(cur.to_vec());
        cur[var] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[var] = e as u8;
        push_degree(out, cur, var + 1, left - e);
    }
    cur[var] = 0;
}

/// Shared table for `nvars` variables.
pub fn table_for(nvars: usize) -> Arc<MonomialTable> {
    static TABLES: OnceLock<Mutex<HashMap<usize, Arc<MonomialTable>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = tables.lock().expect("jet table cache poisoned");
    guard
        .entry(nvars)
        .or_insert_with(|| Arc::new(MonomialTable::build(nvars)))
        .clone()
}

/// Truncated Taylor expansion in `nvars` variables.
#[derive(Clone)]
pub struct Jet<S> {
    table: Arc<MonomialTable>,
    order: usize,
    coeffs: Vec<S>,
}

impl<S: Real> Jet<S> {
    pub fn constant(table: &Arc<MonomialTable>, order: usize, value: S) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} above {MAX_ORDER}");
        let mut coeffs = vec![S::zero(); table.count(order)];
        coeffs[0] = value;
        Jet {
            table: table.clone(),
            order,
            coeffs,
        }
    }

    /// The coordinate function of variable `var`, expanded at `value`.
    pub fn variable(table: &Arc<MonomialTable>, order: usize, var: usize, value: S) -> Self {
        let mut jet = Self::constant(table, order, value);
        if order >= 1 {
            let mut e = vec![0u8; table.nvars()];
            e[var] = 1;
            jet.coeffs[table.index_of(&e).unwrap()] = S::one();
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.table.nvars()
    }

    pub fn table(&self) -> &Arc<MonomialTable> {
        &self.table
    }

    /// Raw Taylor coefficients in graded-lex order.
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet {
            table: self.table.clone(),
            order,
            coeffs: self.coeffs[..self.table.count(order)].to_vec(),
        }
    }

    /// Partial derivative with respect to variable `var`; the order drops by one.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let raise = &self.table.raise[var];
        let coeffs = (0..self.table.count(order))
            .map(|m| {
                let up = raise[m] as usize;
                let e = self.table.exps[m][var];
                S::of(f64::from(e) + 1.0) * self.coeffs[up]
            })
            .collect();
        Jet {
            table: self.table.clone(),
            order,
            coeffs,
        }
    }

    /// The true partial derivative for `multi_index` (factorials applied).
    pub fn partial(&self, multi_index: &[u8]) -> Result<S, JetError> {
        if multi_index.len() != self.nvars() {
            return Err(JetError::BadMultiIndex {
                got: multi_index.len(),
                expected: self.nvars(),
            });
        }
        let total: usize = multi_index.iter().map(|&v| v as usize).sum();
        if total > self.order {
            return Err(JetError::OrderExceeded {
                requested: total,
                order: self.order,
            });
        }
        let k = self.table.index_of(multi_index).unwrap();
        let weight: f64 = multi_index.iter().map(|&m| factorial(m as usize)).product();
        Ok(self.coeffs[k] * S::of(weight))
    }

    fn same_table(&self, other: &Self) {
        debug_assert!(
            Arc::ptr_eq(&self.table, &other.table),
            "jets from different variable spaces"
        );
    }

    fn zip_with(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        self.same_table(other);
        let order = self.order.min(other.order);
        let count = self.table.count(order);
        let coeffs = self.coeffs[..count]
            .iter()
            .zip(&other.coeffs[..count])
            .map(|(&a, &b)| f(a, b))
            .collect();
        Jet {
            table: self.table.clone(),
            order,
            coeffs,
        }
    }

    fn mul_jet(&self, other: &Self) -> Self {
        self.same_table(other);
        let order = self.order.min(other.order);
        let count = self.table.count(order);
        let mut coeffs = Vec::with_capacity(count);
        for k in 0..count {
            let mut acc = S::zero();
            for &(a, b) in self.table.pairs_of(k) {
                acc = acc + self.coeffs[a as usize] * other.coeffs[b as usize];
            }
            coeffs.push(acc);
        }
        Jet {
            table: self.table.clone(),
            order,
            coeffs,
        }
    }

    fn div_jet(&self, other: &Self) -> Self {
        self.same_table(other);
        let order = self.order.min(other.order);
        let count = self.table.count(order);
        let b0 = other.coeffs[0];
        let mut q: Vec<S> = Vec::with_capacity(count);
        for k in 0..count {
            let mut acc = self.coeffs[k];
            for &(a, b) in self.table.pairs_of(k) {
                if a != 0 {
                    acc = acc - other.coeffs[a as usize] * q[b as usize];
                }
            }
            q.push(acc / b0);
        }
        Jet {
            table: self.table.clone(),
            order,
            coeffs: q,
        }
    }

    fn scale(&self, c: S) -> Self {
        Jet {
            table: self.table.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|&v| v * c).collect(),
        }
    }

    /// Composes a univariate function with this jet, given its Taylor
    /// coefficients `taylor[k] = f^(k)(a0) / k!` at the point value.
    pub fn compose(&self, taylor: &[S]) -> Self {
        debug_assert!(taylor.len() > self.order);
        let mut shifted = self.clone();
        shifted.coeffs[0] = S::zero();
        let mut acc = Self::constant(&self.table, self.order, taylor[self.order]);
        for k in (0..self.order).rev() {
            acc = acc.mul_jet(&shifted);
            acc.coeffs[0] = acc.coeffs[0] + taylor[k];
        }
        acc
    }

    fn power_taylor(&self, p: S, integer: Option<i32>) -> Vec<S> {
        let a0 = self.coeffs[0];
        let mut out = Vec::with_capacity(self.order + 1);
        let mut falling = S::one();
        for k in 0..=self.order {
            let kf = S::of(k as f64);
            if k > 0 {
                falling = falling * (p - kf + S::one()) / kf;
            }
            let base = match integer {
                Some(m) => {
                    let e = m - k as i32;
                    if falling.is_zero() {
                        S::zero()
                    } else {
                        a0.powi(e)
                    }
                }
                None => a0.powf(p - kf),
            };
            out.push(if k == 0 { base } else { falling * base });
        }
        out
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|v| v as f64).product()
}

impl<S: Real> fmt::Debug for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.nvars())
            .field("order", &self.order)
            .field("value", &self.coeffs[0])
            .finish()
    }
}

impl<S: Real> PartialEq for Jet<S> {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.coeffs == other.coeffs
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<S: Real> $tr for Jet<S> {
            type Output = Jet<S>;
            fn $method(self, rhs: Jet<S>) -> Jet<S> {
                $body(&self, &rhs)
            }
        }
        impl<'a, S: Real> $tr<&'a Jet<S>> for &'a Jet<S> {
            type Output = Jet<S>;
            fn $method(self, rhs: &'a Jet<S>) -> Jet<S> {
                $body(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Jet<S>, b: &Jet<S>| a.zip_with(b, |x, y| x + y));
forward_binop!(Sub, sub, |a: &Jet<S>, b: &Jet<S>| a.zip_with(b, |x, y| x - y));
forward_binop!(Mul, mul, |a: &Jet<S>, b: &Jet<S>| a.mul_jet(b));
forward_binop!(Div, div, |a: &Jet<S>, b: &Jet<S>| a.div_jet(b));

impl<S: Real> Neg for Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.scale(-S::one())
    }
}

impl<S: Real> Mul<S> for &Jet<S> {
    type Output = Jet<S>;
    fn mul(self, rhs: S) -> Jet<S> {
        self.scale(rhs)
    }
}

impl<S: Real> Scalar for Jet<S> {
    type Real = S;

    fn value(&self) -> S {
        self.coeffs[0]
    }

    fn lift(&self, c: S) -> Self {
        Jet::constant(&self.table, self.order, c)
    }

    fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    fn sqrt(&self) -> Self {
        let mut taylor = self.power_taylor(S::of(0.5), None);
        taylor[0] = self.coeffs[0].sqrt();
        self.compose(&taylor)
    }

    fn exp(&self) -> Self {
        let e = self.coeffs[0].exp();
        let taylor: Vec<S> = (0..=self.order)
            .map(|k| e / S::of(factorial(k)))
            .collect();
        self.compose(&taylor)
    }

    fn ln(&self) -> Self {
        let a0 = self.coeffs[0];
        let taylor: Vec<S> = (0..=self.order)
            .map(|k| {
                if k == 0 {
                    a0.ln()
                } else {
                    let sign = if k % 2 == 1 { S::one() } else { -S::one() };
                    sign / (S::of(k as f64) * a0.powi(k as i32))
                }
            })
            .collect();
        self.compose(&taylor)
    }

    fn sin(&self) -> Self {
        let (s, c) = (self.coeffs[0].sin(), self.coeffs[0].cos());
        let cycle = [s, c, -s, -c];
        let taylor: Vec<S> = (0..=self.order)
            .map(|k| cycle[k % 4] / S::of(factorial(k)))
            .collect();
        self.compose(&taylor)
    }

    fn cos(&self) -> Self {
        let (s, c) = (self.coeffs[0].sin(), self.coeffs[0].cos());
        let cycle = [c, -s, -c, s];
        let taylor: Vec<S> = (0..=self.order)
            .map(|k| cycle[k % 4] / S::of(factorial(k)))
            .collect();
        self.compose(&taylor)
    }

    fn powi(&self, k: i32) -> Self {
        let taylor = self.power_taylor(S::of(f64::from(k)), Some(k));
        self.compose(&taylor)
    }

    fn powf(&self, p: S) -> Self {
        let taylor = self.power_taylor(p, None);
        self.compose(&taylor)
    }

    fn pow(&self, e: &Self) -> Self {
        let mut out = (e.clone() * self.ln()).exp();
        out.coeffs[0] = self.coeffs[0].powf(e.coeffs[0]);
        out
    }
}

/// Seeds one jet per coordinate: jet `i` is variable `i` expanded at `values[i]`.
pub fn jet_seed<S: Real>(values: &[S], order: usize) -> Vec<Jet<S>> {
    let table = table_for(values.len());
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(&table, order, i, v))
        .collect()
}

/// Partial derivative of `jet` for `multi_index`, with factorials applied.
pub fn extract_partial<S: Real>(jet: &Jet<S>, multi_index: &[u8]) -> Result<S, JetError> {
    jet.partial(multi_index)
}
