use std::fmt;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::scalar::{Real, Scalar};

/// Raised when an evaluation point lies outside the admissible region.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("direction y is zero (excluded from the slit tangent bundle)")]
    ZeroDirection,
    #[error("square root of a negative value ({0})")]
    NegativeSqrt(f64),
    #[error("square root at zero is not differentiable")]
    SqrtAtZero,
    #[error("logarithm of a non-positive value ({0})")]
    NonPositiveLog(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("power with invalid base {0}")]
    InvalidPowBase(f64),
    #[error("{0}")]
    Guard(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }
}

/// Expression tree. Symbol indices are zero-based (`X(0)` prints as `x1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X(usize),
    Y(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn has_symbols(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::X(_) | Expr::Y(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.has_symbols() || b.has_symbols()
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.has_symbols(),
        }
    }

    fn max_index(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::X(i) | Expr::Y(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.max_index().max(b.max_index())
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.max_index(),
        }
    }

    pub fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T, DomainError> {
        match self {
            Expr::Num(v) => Ok(x[0].lift_f64(*v)),
            Expr::X(i) => Ok(x[*i].clone()),
            Expr::Y(i) => Ok(y[*i].clone()),
            Expr::Add(a, b) => Ok(a.eval(x, y)? + b.eval(x, y)?),
            Expr::Sub(a, b) => Ok(a.eval(x, y)? - b.eval(x, y)?),
            Expr::Mul(a, b) => Ok(a.eval(x, y)? * b.eval(x, y)?),
            Expr::Div(a, b) => {
                let num = a.eval(x, y)?;
                let den = b.eval(x, y)?;
                if den.value().is_zero() {
                    return Err(DomainError::DivisionByZero);
                }
                Ok(num / den)
            }
            Expr::Neg(a) => Ok(-a.eval(x, y)?),
            Expr::Pow(a, b) => {
                let base = a.eval(x, y)?;
                if !b.has_symbols() {
                    let p = b.eval(&[0.0f64], &[0.0f64])?;
                    return pow_constant(&base, p);
                }
                let e = b.eval(x, y)?;
                let bv = base.value().to_f64_lossy();
                if bv <= 0.0 {
                    return Err(DomainError::InvalidPowBase(bv));
                }
                Ok(base.pow(&e))
            }
            Expr::Call(f, a) => {
                let v = a.eval(x, y)?;
                let val = v.value().to_f64_lossy();
                match f {
                    Func::Sqrt => {
                        if val < 0.0 {
                            Err(DomainError::NegativeSqrt(val))
                        } else if val == 0.0 && !v.is_constant() {
                            Err(DomainError::SqrtAtZero)
                        } else {
                            Ok(v.sqrt())
                        }
                    }
                    Func::Log => {
                        if val <= 0.0 {
                            Err(DomainError::NonPositiveLog(val))
                        } else {
                            Ok(v.ln())
                        }
                    }
                    Func::Sin => Ok(v.sin()),
                    Func::Cos => Ok(v.cos()),
                    Func::Exp => Ok(v.exp()),
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X(i) => write!(f, "x{}", i + 1),
            Expr::Y(i) => write!(f, "y{}", i + 1),
            Expr::Add(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " + ")?;
                b.write_at(f, 2)
            }
            Expr::Sub(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " - ")?;
                b.write_at(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_at(f, 2)?;
                write!(f, "*")?;
                b.write_at(f, 3)
            }
            Expr::Div(a, b) => {
                a.write_at(f, 2)?;
                write!(f, "/")?;
                b.write_at(f, 3)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_at(f, 3)
            }
            Expr::Pow(a, b) => {
                a.write_at(f, 5)?;
                write!(f, "^")?;
                b.write_at(f, 3)
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

fn pow_constant<T: Scalar>(base: &T, p: f64) -> Result<T, DomainError> {
    let bv = base.value().to_f64_lossy();
    if p.fract() == 0.0 && p.abs() <= 1024.0 {
        let k = p.to_i32().unwrap_or(0);
        if bv == 0.0 && k < 0 {
            return Err(DomainError::DivisionByZero);
        }
        return Ok(base.powi(k));
    }
    if bv < 0.0 || (bv == 0.0 && !base.is_constant()) {
        return Err(DomainError::InvalidPowBase(bv));
    }
    Ok(base.powf(<T::Real as Real>::of(p)))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

/// A parsed Finsler function `F(x, y)` in dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricExpr {
    root: Expr,
    dim: usize,
}

impl MetricExpr {
    pub(crate) fn new(root: Expr, dim: usize) -> Self {
        debug_assert!(root.max_index().is_none_or(|m| m < dim));
        MetricExpr { root, dim }
    }

    /// Builds from an already-constructed tree; symbol indices must be below `dim`.
    pub fn from_expr(root: Expr, dim: usize) -> Option<Self> {
        (dim >= 3 && root.max_index().is_none_or(|m| m < dim)).then_some(MetricExpr { root, dim })
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates `F` at `(x, y)` in whatever algebra the inputs live in.
    pub fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T, DomainError> {
        assert_eq!(x.len(), self.dim, "x has wrong dimension");
        assert_eq!(y.len(), self.dim, "y has wrong dimension");
        if y.iter().all(|v| v.value().is_zero()) {
            return Err(DomainError::ZeroDirection);
        }
        self.root.eval(x, y)
    }
}

impl fmt::Display for MetricExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Evaluates `expr` at a point given as plain numbers.
pub fn eval_expr<T: Scalar>(expr: &MetricExpr, x: &[T], y: &[T]) -> Result<T, DomainError> {
    expr.eval(x, y)
}
