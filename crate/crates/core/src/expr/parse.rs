//! Parenthesised infix text form, e.g. `((x0 * 1.5) + sqrt(x1))`.
//!
//! Parameters are written with Rust's shortest round-trip float formatting,
//! so `parse(display(e)) == e` holds exactly.

use alloc::boxed::Box;
use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use super::{BinaryFn, Expr};
use crate::interval::UnaryFn;
use crate::Error;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Param(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expr, Error> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), Error> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&alloc::format!("expected '{}'", c as char)))
        }
    }

    fn word(&mut self) -> &str {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || matches!(c, b'.' | b'_' | b'+' | b'-'))
        {
            // a sign only belongs to the token at its start or after an exponent marker
            let c = self.src[self.pos];
            if matches!(c, b'+' | b'-')
                && self.pos != start
                && !matches!(self.src[self.pos - 1], b'e' | b'E')
            {
                break;
            }
            self.pos += 1;
        }
        core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn expr(&mut self) -> Result<Expr, Error> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let lhs = self.expr()?;
                self.skip_ws();
                let op = match self.peek() {
                    Some(b'+') => BinaryFn::Add,
                    Some(b'*') => BinaryFn::Mul,
                    Some(b'%') => BinaryFn::Div,
                    _ => return Err(self.error("expected binary operator '+', '*' or '%'")),
                };
                self.pos += 1;
                let rhs = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
            }
            Some(_) => {
                let start = self.pos;
                let tok = self.word();
                if tok.is_empty() {
                    return Err(self.error("unexpected character"));
                }
                if let Some(f) = UnaryFn::from_name(tok) {
                    self.expect(b'(')?;
                    let a = self.expr()?;
                    self.expect(b')')?;
                    return Ok(Expr::unary(f, a));
                }
                if let Some(idx) = tok.strip_prefix('x') {
                    return idx
                        .parse::<usize>()
                        .map(Expr::Var)
                        .map_err(|_| Error::Parse {
                            position: start,
                            message: alloc::format!("bad variable '{tok}'"),
                        });
                }
                tok.parse::<f64>()
                    .map(Expr::Param)
                    .map_err(|_| Error::Parse {
                        position: start,
                        message: alloc::format!("unknown token '{tok}'"),
                    })
            }
        }
    }
}
