//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr     := sign? term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := sign factor | base ('^' nat)?
//! base     := rational | var | '(' expr ')'
//! rational := int ('/' nat)?
//! var      := letters nat        (looked up in the variable space)
//! ```
//!
//! Whitespace is ignored between tokens. Positions in errors are byte offsets.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{ParseError, ParseErrorKind};
use crate::poly::{Poly, Rational, VarSpace, MAX_DEGREE};

pub fn parse_expression(text: &str, space: &VarSpace) -> Result<Poly, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, space };
    p.skip_ws();
    if p.at_end() {
        return Err(p.err(ParseErrorKind::UnexpectedEnd));
    }
    let e = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.err(ParseErrorKind::UnexpectedChar(c as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    space: &'a VarSpace,
}

impl Parser<'_> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { position: self.pos, kind }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        self.skip_ws();
        let negate = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = -acc;
        }
        loop {
            if self.eat(b'+') {
                let t = self.term()?;
                acc = &acc + &t;
            } else if self.eat(b'-') {
                let t = self.term()?;
                acc = &acc - &t;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let start = self.pos;
            let f = self.factor()?;
            acc = acc
                .checked_mul(&f)
                .map_err(|e| ParseError { position: start, kind: e.into() })?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        self.skip_ws();
        if self.eat(b'-') {
            return Ok(-self.factor()?);
        }
        if self.eat(b'+') {
            return self.factor();
        }
        let base = self.base()?;
        if self.eat(b'^') {
            self.skip_ws();
            match self.peek() {
                Some(b'-') => return Err(self.err(ParseErrorKind::NegativeExponent)),
                Some(c) if c.is_ascii_digit() => {}
                Some(_) => return Err(self.err(ParseErrorKind::Expected("a natural-number exponent"))),
                None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
            }
            let start = self.pos;
            let digits = self.digits();
            if matches!(self.peek(), Some(b'.') | Some(b'/')) {
                return Err(self.err(ParseErrorKind::NonIntegerExponent));
            }
            let e: u32 = match digits.parse() {
                Ok(e) if e <= MAX_DEGREE => e,
                Ok(_) | Err(_) => {
                    return Err(ParseError {
                        position: start,
                        kind: ParseErrorKind::Poly(crate::error::PolyError::DegreeBound(u32::MAX)),
                    })
                }
            };
            return base.pow(e).map_err(|k| ParseError { position: start, kind: k.into() });
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn base(&mut self) -> Result<Poly, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(if self.at_end() {
                        self.err(ParseErrorKind::UnexpectedEnd)
                    } else {
                        self.err(ParseErrorKind::Expected("`)`"))
                    });
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let num: BigInt = self.digits().parse().expect("digits");
                let mut den = BigInt::from(1);
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        return Err(self.err(ParseErrorKind::Expected("a denominator")));
                    }
                    let dpos = self.pos;
                    den = self.digits().parse().expect("digits");
                    if den.is_zero() {
                        return Err(ParseError { position: dpos, kind: ParseErrorKind::ZeroDenominator });
                    }
                }
                if self.peek() == Some(b'.') {
                    return Err(self.err(ParseErrorKind::UnexpectedChar('.')));
                }
                Ok(Poly::constant(self.space, Rational::new(num, den)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
                    self.pos += 1;
                }
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                match self.space.index_of(&name) {
                    Some(i) => Ok(Poly::var(self.space, i)),
                    None => Err(ParseError { position: start, kind: ParseErrorKind::UnknownVariable(name) }),
                }
            }
            Some(c) => Err(self.err(ParseErrorKind::UnexpectedChar(c as char))),
        }
    }
}
