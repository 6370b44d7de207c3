//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | identifier | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::{Expr, ExprError, Rational, Vars};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = lx.src[start..i].parse().expect("digits");
                lx.toks.push((Tok::Int(n), start));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                lx.toks.push((Tok::Ident(lx.src[start..i].to_string()), start));
            } else if "+-*/^()".contains(c) {
                lx.toks.push((Tok::Sym(c), i));
                i += 1;
            } else {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax { pos: i, message: format!("unexpected character `{ch}`") });
            }
        }
        lx.toks.push((Tok::End, src.len()));
        Ok(lx.toks)
    }
}

struct Parser<'v> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'v Vars,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, message: &str) -> Result<T, ExprError> {
        Err(ExprError::Syntax { pos: self.pos(), message: message.to_string() })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Sym('/') => {
                    self.bump();
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs).map_err(|_| ExprError::DivisionByZeroAt { pos })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() != &Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let parens = self.peek() == &Tok::Sym('(');
        if parens {
            self.bump();
        }
        let k = match self.peek().clone() {
            Tok::Int(n) => {
                let k = n.to_u32();
                match k {
                    Some(k) => {
                        self.bump();
                        k
                    }
                    None => return self.syntax("exponent too large"),
                }
            }
            _ => return self.syntax("exponent must be a non-negative integer"),
        };
        if parens {
            if self.peek() != &Tok::Sym(')') {
                return self.syntax("expected `)`");
            }
            self.bump();
        }
        Ok(base.pow(k))
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::from_rational(Rational::from_integer(n))),
            Tok::Ident(name) => match self.vars.index_of(&name) {
                Ok(i) => Ok(Expr::var(i)),
                Err(_) => Err(ExprError::UnknownIdentifier { name, pos }),
            },
            Tok::Sym('(') => {
                let e = self.expr()?;
                if self.peek() != &Tok::Sym(')') {
                    return self.syntax("expected `)`");
                }
                self.bump();
                Ok(e)
            }
            Tok::End => Err(ExprError::Syntax { pos, message: "unexpected end of input".into() }),
            Tok::Sym(c) => Err(ExprError::Syntax { pos, message: format!("unexpected `{c}`") }),
        }
    }
}

/// Parses `text` into canonical form; identifiers resolve to positions in
/// `vars`.
pub fn parse(text: &str, vars: &Vars) -> Result<Expr, ExprError> {
    let toks = Lexer::run(text)?;
    let mut p = Parser { toks, at: 0, vars };
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        return p.syntax("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2() -> Vars {
        Vars::coordinates(2)
    }

    #[test]
    fn zero_and_identity() {
        assert!(parse("0", &v2()).unwrap().is_zero());
        assert!(parse("(u1+u2)^2 - u1^2 - 2*u1*u2 - u2^2", &v2()).unwrap().is_zero());
    }

    #[test]
    fn precedence() {
        let a = parse("-u1^2", &v2()).unwrap();
        let b = parse("-(u1*u1)", &v2()).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse("1 + 2*3", &v2()).unwrap(), Expr::from_int(7));
        assert_eq!(parse("2/4", &v2()).unwrap(), Expr::from_ratio(1, 2));
        assert_eq!(parse("8/2/2", &v2()).unwrap(), Expr::from_int(2));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse("u1 + v", &v2()), Err(ExprError::UnknownIdentifier { name: "v".into(), pos: 5 }));
        assert!(matches!(parse("u1 +", &v2()), Err(ExprError::Syntax { pos: 4, .. })));
        assert!(matches!(parse("u1 $ 2", &v2()), Err(ExprError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("u1^u2", &v2()), Err(ExprError::Syntax { .. })));
        assert_eq!(parse("1/(u1-u1)", &v2()), Err(ExprError::DivisionByZeroAt { pos: 2 }));
    }

    #[test]
    fn declared_names() {
        let vars = Vars::new(["x", "lambda"]);
        let e = parse("lambda*x - x*lambda", &vars).unwrap();
        assert!(e.is_zero());
    }
}
