//! Parser for polynomial expressions in `t` and `z` with exact Gaussian rational coefficients.
//!
//! Grammar: sums and differences of products, `^` with a non-negative integer exponent,
//! parentheses, decimal or integer literals, `i`, `t`, `z`, and division by constants.
//! Juxtaposition multiplies (`3t^2z`).

use num_traits::Zero;

use crate::coeff::{parse_rational, Coeff, GaussRat};
use crate::error::{Error, Result};
use crate::poly::{BiPoly, TPoly};

pub fn parse_bipoly(src: &str) -> Result<BiPoly<GaussRat>> {
    let mut p = Parser { chars: src.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
    let e = p.expr()?;
    if p.pos != p.chars.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

/// Parse an expression that must not involve `z`.
pub fn parse_tpoly(src: &str) -> Result<TPoly<GaussRat>> {
    let b = parse_bipoly(src)?;
    match b.zdegree() {
        None => Ok(TPoly::zero()),
        Some(0) => Ok(b.zcoeff(0)),
        _ => Err(Error::Parse(format!("{src:?} depends on z"))),
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err(&self, msg: &str) -> Error {
        let s: String = self.chars.iter().collect();
        Error::Parse(format!("{msg} at offset {} in {s:?}", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<BiPoly<GaussRat>> {
        let mut acc = self.product()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if c == '+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<BiPoly<GaussRat>> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.mul(&rhs);
                }
                Some('/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    let c = constant_of(&rhs).ok_or_else(|| self.err("division by a non-constant"))?;
                    if c.is_zero() {
                        return Err(self.err("division by zero"));
                    }
                    let inv = GaussRat::one_over(&c);
                    acc = acc.scale_by(&TPoly::constant(inv));
                }
                Some(c) if c == '(' || c == 'i' || c == 't' || c == 'z' || c.is_ascii_digit() || c == '.' => {
                    let rhs = self.power()?;
                    acc = acc.mul(&rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<BiPoly<GaussRat>> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(BiPoly::zero().sub(&self.unary()?))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BiPoly<GaussRat>> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let k: usize = digits.parse().map_err(|_| self.err("expected an integer exponent"))?;
            let mut acc = BiPoly::from_t(TPoly::constant(GaussRat::from_int(1)));
            let mut sq = base;
            let mut k = k;
            while k > 0 {
                if k & 1 == 1 {
                    acc = acc.mul(&sq);
                }
                k >>= 1;
                if k > 0 {
                    sq = sq.mul(&sq);
                }
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<BiPoly<GaussRat>> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('i') => {
                self.pos += 1;
                let i = GaussRat::new(Zero::zero(), num_traits::One::one());
                Ok(BiPoly::from_t(TPoly::constant(i)))
            }
            Some('t') => {
                self.pos += 1;
                Ok(BiPoly::from_t(TPoly::t()))
            }
            Some('z') => {
                self.pos += 1;
                Ok(BiPoly::z())
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                let r = parse_rational(&text)?;
                Ok(BiPoly::from_t(TPoly::constant(GaussRat::new(r, Zero::zero()))))
            }
            _ => Err(self.err("expected a number, variable or '('")),
        }
    }
}

fn constant_of(p: &BiPoly<GaussRat>) -> Option<GaussRat> {
    match p.zdegree() {
        None => Some(GaussRat::zero()),
        Some(0) => {
            let c = p.zcoeff(0);
            match c.degree() {
                None => Some(GaussRat::zero()),
                Some(0) => Some(c.coeff(0)),
                _ => None,
            }
        }
        _ => None,
    }
}

trait Reciprocal {
    fn one_over(c: &Self) -> Self;
}

impl Reciprocal for GaussRat {
    fn one_over(c: &Self) -> Self {
        GaussRat::from_int(1) / c.clone()
    }
}
