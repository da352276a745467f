//! Exact scalar expressions such as `1+3^2`, `-4/7` or `(1+5)^-2*25`.
//!
//! Grammar: integers, `+ - * /`, `^` with an integer exponent (right
//! associative, binds tighter than unary minus on its left), parentheses.
//! Evaluation is over `Q`; no floating point is involved anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use padic_confluence::padic::padic_from_ratio;
use padic_confluence::{Error, PadicScalar, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Op(char),
    Open,
    Close,
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            ' ' | '\t' => i += 1,
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Tok::Num(text.parse().expect("digits")));
            }
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Tok::Op(ch));
                i += 1;
            }
            '(' => {
                out.push(Tok::Open);
                i += 1;
            }
            ')' => {
                out.push(Tok::Close);
                i += 1;
            }
            other => return Err(Error::Parse(format!("unexpected {other:?} at offset {i} in {s:?}"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn fail(&self, what: &str) -> Error {
        Error::Parse(format!("{what} in {:?}", self.src))
    }

    fn expr(&mut self) -> Result<BigRational> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<BigRational> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            if op == '*' {
                acc *= rhs;
            } else {
                if rhs.is_zero() {
                    return Err(self.fail("division by zero"));
                }
                acc /= rhs;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<BigRational> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<BigRational> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let e = self.unary()?;
            if !e.is_integer() {
                return Err(self.fail("non-integer exponent"));
            }
            let e = e.to_integer().to_i32().filter(|e| e.abs() <= 100_000).ok_or_else(|| self.fail("exponent out of range"))?;
            if e < 0 && base.is_zero() {
                return Err(self.fail("zero to a negative power"));
            }
            return Ok(num_traits::pow::Pow::pow(&base, e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<BigRational> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(BigRational::from_integer(n))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(&Tok::Close) {
                    return Err(self.fail("missing ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.fail("expected a number or '('")),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut parser = Parser { toks: &toks, pos: 0, src: s };
    let v = parser.expr()?;
    if parser.pos != toks.len() {
        return Err(parser.fail("trailing input"));
    }
    Ok(v)
}

/// Integers stay exact (with fallback cap `prec`); other rationals are
/// embedded modulo `p^prec`.
pub fn to_padic(r: &BigRational, p: u64, prec: i64) -> Result<PadicScalar> {
    if r.denom().is_one() || r.denom().abs().is_one() {
        return Ok(PadicScalar::exact_int(p, r.to_integer(), prec));
    }
    padic_from_ratio(r, p, prec)
}

pub fn parse_scalar(s: &str, p: u64, prec: i64) -> Result<PadicScalar> {
    to_padic(&parse_rational(s)?, p, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> String {
        parse_rational(s).unwrap().to_string()
    }

    #[test]
    fn arithmetic() {
        assert_eq!(q("1+3^2"), "10");
        assert_eq!(q("-4/6"), "-2/3");
        assert_eq!(q("2^3^2"), "512");
        assert_eq!(q("-3^2"), "-9");
        assert_eq!(q("(1+5)^-2*72"), "2");
        assert_eq!(q(" 7 - 2 * 3 "), "1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("2^(1/2)").is_err());
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("(1").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn embedding() {
        let x = parse_scalar("1+3^2", 3, 20).unwrap();
        assert_eq!(x, PadicScalar::exact_int(3, 10, 20));
        let y = parse_scalar("1/3", 3, 20).unwrap();
        assert_eq!(padic_confluence::Scalar::valuation(&y), Some(-1));
    }
}
