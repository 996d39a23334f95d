//! Metric expression language.
//!
//! A metric is written as the Finsler function `F(x, y)` over the symbols
//! `x1..xn` (position) and `y1..yn` (direction):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | base ("^" factor)?
//! base   := number | symbol | func "(" expr ")" | "(" expr ")"
//! func   := sqrt | sin | cos | exp | log
//! ```
//!
//! `^` binds tighter than unary minus (`-y1^2` is `-(y1^2)`) and is right
//! associative.

mod expr;
mod lexer;
mod parser;

pub use expr::{eval_expr, DomainError, Expr, Func, MetricExpr};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unknown symbol '{name}' at {line}:{col}")]
    UnknownSymbol {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("dimension {0} is below the minimum of 3")]
    Dimension(usize),
}

/// Parses `text` as a metric in dimension `dim`.
pub fn parse_metric(text: &str, dim: usize) -> Result<MetricExpr, DslError> {
    if dim < 3 {
        return Err(DslError::Dimension(dim));
    }
    let tokens = lexer::tokenize(text)?;
    let root = parser::Parser::new(&tokens, dim).parse()?;
    Ok(MetricExpr::new(root, dim))
}
