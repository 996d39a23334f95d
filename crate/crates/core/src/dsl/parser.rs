use super::expr::{Expr, Func};
use super::lexer::{Tok, Token};
use super::DslError;

pub(crate) struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    pub fn new(tokens: &'a [Token], dim: usize) -> Self {
        Parser {
            tokens,
            pos: 0,
            dim,
        }
    }

    pub fn parse(mut self) -> Result<Expr, DslError> {
        let e = self.expr()?;
        match self.peek().tok {
            Tok::Eof => Ok(e),
            _ => Err(self.error("expected operator or end of input")),
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str) -> DslError {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Eof => "end of input".to_string(),
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            other => format!("{other:?}"),
        };
        DslError::Syntax {
            line: t.line,
            col: t.col,
            message: format!("{message}, found {found}"),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), DslError> {
        if self.peek().tok == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error("expected ')'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, DslError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(sym) = self.symbol(&name, t.line, t.col)? {
                    return Ok(sym);
                }
                let func = Func::from_name(&name).ok_or_else(|| DslError::UnknownSymbol {
                    line: t.line,
                    col: t.col,
                    name: name.clone(),
                })?;
                if self.peek().tok != Tok::LParen {
                    return Err(self.error(&format!("expected '(' after {name}")));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.error("expected number, symbol, function or '('")),
        }
    }

    /// `x<k>` / `y<k>` with 1 ≤ k ≤ dim. Returns `Ok(None)` for other identifiers.
    fn symbol(&self, name: &str, line: usize, col: usize) -> Result<Option<Expr>, DslError> {
        let mut chars = name.chars();
        let head = chars.next();
        let digits = chars.as_str();
        if !matches!(head, Some('x') | Some('y'))
            || digits.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
        {
            return Ok(None);
        }
        let k: usize = digits.parse().unwrap_or(0);
        if k == 0 || k > self.dim {
            return Err(DslError::UnknownSymbol {
                line,
                col,
                name: name.to_string(),
            });
        }
        Ok(Some(match head {
            Some('x') => Expr::X(k - 1),
            _ => Expr::Y(k - 1),
        }))
    }
}
