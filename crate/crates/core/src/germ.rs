//! Function germs on the corner `H^r x R^k` and their unfoldings.

use num_traits::Zero;

use crate::error::{GermError, ParseError};
use crate::parse::parse_expression;
use crate::poly::{Poly, Rational, VarSpace};

/// A polynomial germ `f(x, y)` in the square of the maximal ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Germ {
    poly: Poly,
}

impl Germ {
    pub fn new(poly: Poly) -> Result<Self, GermError> {
        let (r, k, n) = poly.space().rkn().ok_or(GermError::NotCornerSpace)?;
        let poly = if n > 0 {
            let qs: Vec<usize> = (0..n).map(|j| r + k + j).collect();
            if !poly.independent_of(&qs) {
                return Err(GermError::HasParameters);
            }
            poly.embed(&VarSpace::corner(r, k, 0)).map_err(|_| GermError::HasParameters)?
        } else {
            poly
        };
        if let Some(d) = poly.terms().map(|(m, _)| m.degree()).find(|&d| d <= 1) {
            return Err(GermError::LowOrderTerm(d));
        }
        Ok(Self { poly })
    }

    /// Parses `text` in the space `(r, k, 0)`.
    pub fn parse(text: &str, r: usize, k: usize) -> Result<Self, crate::Error> {
        let p = parse_expression(text, &VarSpace::corner(r, k, 0))?;
        Ok(Self::new(p)?)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn space(&self) -> &VarSpace {
        self.poly.space()
    }

    pub fn r(&self) -> usize {
        self.space().rkn().unwrap().0
    }

    pub fn k(&self) -> usize {
        self.space().rkn().unwrap().1
    }

    pub fn nvars(&self) -> usize {
        self.space().len()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Germ {
        Germ { poly: self.poly.scale(c) }
    }
}

impl std::fmt::Display for Germ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.poly.fmt(f)
    }
}

/// An unfolding `F(x, y, q)` with `F(x, y, 0)` a germ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingFamily {
    poly: Poly,
    core: Germ,
}

impl GeneratingFamily {
    pub fn new(poly: Poly) -> Result<Self, GermError> {
        let (r, k, n) = poly.space().rkn().ok_or(GermError::NotCornerSpace)?;
        if !poly.constant_term().is_zero() {
            return Err(GermError::LowOrderTerm(0));
        }
        let mut at_zero = poly.clone();
        for j in 0..n {
            at_zero = at_zero.substitute_value(r + k + j, &Rational::zero());
        }
        let core = Germ::new(at_zero.embed(&VarSpace::corner(r, k, 0)).expect("q-free"))?;
        Ok(Self { poly, core })
    }

    pub fn parse(text: &str, r: usize, k: usize, n: usize) -> Result<Self, crate::Error> {
        let p = parse_expression(text, &VarSpace::corner(r, k, n))?;
        Ok(Self::new(p)?)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn core(&self) -> &Germ {
        &self.core
    }

    pub fn space(&self) -> &VarSpace {
        self.poly.space()
    }

    pub fn rkn(&self) -> (usize, usize, usize) {
        self.space().rkn().unwrap()
    }

    /// `dF/dq_j` restricted to `q = 0`, as polynomials in `(x, y)`.
    pub fn initial_velocities(&self) -> Vec<Poly> {
        let (r, k, n) = self.rkn();
        let target = VarSpace::corner(r, k, 0);
        (0..n)
            .map(|j| {
                let mut d = self.poly.differentiate(r + k + j);
                for l in 0..n {
                    d = d.substitute_value(r + k + l, &Rational::zero());
                }
                d.embed(&target).expect("q-free")
            })
            .collect()
    }

    /// Whether every term has degree at most one in `q` overall.
    pub fn is_affine_in_parameters(&self) -> bool {
        let (r, k, n) = self.rkn();
        self.poly
            .terms()
            .all(|(m, _)| (0..n).map(|j| m.exp(r + k + j)).sum::<u32>() <= 1)
    }

    /// Fixes `q_{j+1} = value` and drops that parameter.
    pub fn slice(&self, j: usize, value: &Rational) -> Result<GeneratingFamily, GermError> {
        let (r, k, n) = self.rkn();
        assert!(j < n, "parameter index out of range");
        let fixed = self.poly.substitute_value(r + k + j, value);
        let target = VarSpace::corner(r, k, n - 1);
        // Parameters after j shift down by one.
        let src = self.space();
        let mut out = Poly::zero(&target);
        for (m, c) in fixed.terms() {
            let mut e = vec![0u32; target.len()];
            for i in 0..src.len() {
                if i == r + k + j {
                    continue;
                }
                let t = if i > r + k + j { i - 1 } else { i };
                e[t] = m.exp(i);
            }
            out = &out + &Poly::monomial(&target, crate::poly::Monomial::from_exponents(e), c.clone());
        }
        GeneratingFamily::new(out)
    }
}

impl std::fmt::Display for GeneratingFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.poly.fmt(f)
    }
}

pub fn parse_germ(text: &str, r: usize, k: usize) -> Result<Germ, crate::Error> {
    Germ::parse(text, r, k)
}

pub fn parse_family(text: &str, r: usize, k: usize, n: usize) -> Result<GeneratingFamily, crate::Error> {
    GeneratingFamily::parse(text, r, k, n)
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn is<T: Send + Sync>() {}
    is::<Germ>();
    is::<GeneratingFamily>();
    is::<ParseError>();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int;

    #[test]
    fn germ_rejects_low_order_terms() {
        assert!(Germ::parse("x1^2 + x2", 2, 0).is_err());
        assert!(Germ::parse("1 + x1^2", 2, 0).is_err());
        assert!(Germ::parse("x1^2 + x1*x2", 2, 0).is_ok());
        assert!(Germ::parse("0", 2, 0).unwrap().is_zero());
    }

    #[test]
    fn family_core_and_velocities() {
        let f = GeneratingFamily::parse("x1^2+x2^2+q1*x1+q2*x2+q3*x1*x2", 2, 0, 3).unwrap();
        assert_eq!(f.core().to_string(), "x1^2 + x2^2");
        let v: Vec<String> = f.initial_velocities().iter().map(|p| p.to_string()).collect();
        assert_eq!(v, ["x1", "x2", "x1*x2"]);
        assert!(f.is_affine_in_parameters());
    }

    #[test]
    fn slicing_drops_a_parameter() {
        let f = GeneratingFamily::parse("x1^2+x1*x2+x2^3+q1*x1+q2*x2+q3*x2^2", 2, 0, 3).unwrap();
        let s = f.slice(2, &int(-1)).unwrap();
        assert_eq!(s.rkn(), (2, 0, 2));
        assert_eq!(s.to_string(), "x2^3 + x1^2 + x1*x2 + x1*q1 - x2^2 + x2*q2");
    }
}
