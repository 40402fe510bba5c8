//! Infix polynomial expressions over `t1, t2, …` with integer literals.

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use super::mpoly::MPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected `{found}` at offset {pos}")]
    Unexpected { pos: usize, found: String },
    #[error("unexpected end of input")]
    Eof,
    #[error("variable t{index} exceeds the declared {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("variables are numbered from t1")]
    ZeroVariable,
}

#[derive(Clone, Debug)]
enum Ast {
    Int(BigInt),
    Var(usize),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, u32),
}

impl Ast {
    fn max_var(&self) -> usize {
        match self {
            Ast::Int(_) => 0,
            Ast::Var(i) => *i,
            Ast::Neg(a) | Ast::Pow(a, _) => a.max_var(),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn eval(&self, n: usize) -> MPoly<BigRational> {
        match self {
            Ast::Int(v) => MPoly::constant(n, BigRational::from_integer(v.clone())),
            Ast::Var(i) => MPoly::var(n, i - 1),
            Ast::Neg(a) => a.eval(n).scale(&BigRational::from_integer((-1).into())),
            Ast::Add(a, b) => a.eval(n).add(&b.eval(n)),
            Ast::Sub(a, b) => a.eval(n).sub(&b.eval(n)),
            Ast::Mul(a, b) => a.eval(n).mul(&b.eval(n)),
            Ast::Pow(a, e) => a.eval(n).pow(*e),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn unexpected(&self) -> ParseError {
        match self.src[self.pos..].chars().next() {
            Some(c) => ParseError::Unexpected { pos: self.pos, found: c.to_string() },
            None => ParseError::Eof,
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.src[start..self.pos])
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some('-') => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.digits().ok_or_else(|| self.unexpected())?;
            let e: u32 = e.parse().map_err(|_| ParseError::Unexpected { pos: self.pos, found: e.into() })?;
            return Ok(Ast::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.unexpected());
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('t') => {
                self.pos += 1;
                match self.digits() {
                    None => Ok(Ast::Var(1)),
                    Some(d) => {
                        let i: usize = d.parse().map_err(|_| ParseError::Unexpected { pos: self.pos, found: d.into() })?;
                        if i == 0 {
                            return Err(ParseError::ZeroVariable);
                        }
                        Ok(Ast::Var(i))
                    }
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits().expect("digit present");
                Ok(Ast::Int(d.parse().expect("decimal digits")))
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses e.g. `t1^2 - 3*t1*t2 + (t2 + 1)^3`. A bare `t` means `t1`. The
/// variable count is `nvars` if given, otherwise the largest index used
/// (at least one).
pub fn parse_poly(s: &str, nvars: Option<usize>) -> Result<MPoly<BigRational>, ParseError> {
    let mut p = Parser { src: s, pos: 0 };
    let ast = p.expr()?;
    if p.peek().is_some() {
        return Err(p.unexpected());
    }
    let used = ast.max_var();
    let n = match nvars {
        Some(n) if used > n => return Err(ParseError::VariableOutOfRange { index: used, nvars: n }),
        Some(n) => n,
        None => used.max(1),
    };
    Ok(ast.eval(n))
}
