//! Exact sparse multivariate polynomials over the rationals.
//!
//! Every polynomial lives in a [`VarSpace`]: the corner space `x1..xr, y1..yk,
//! q1..qn`, the phase space `Q1..Qn, P1..Pn` of a symplectic jet, the
//! cotangent target `q1..qn, p1..pn`, or a space of named unknowns used by the
//! tangency solver.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::PolyError;

/// Largest total degree accepted by parsing, powers and composition.
pub const MAX_DEGREE: u32 = 64;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(c: &Rational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// How the variables of a space are laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layout {
    /// `x1..xr, y1..yk, q1..qn`.
    Corner { r: usize, k: usize, n: usize },
    /// Source coordinates of a symplectic jet: `Q1..Qn, P1..Pn`.
    Phase { n: usize },
    /// Target cotangent coordinates: `q1..qn, p1..pn`.
    Cotangent { n: usize },
    /// Arbitrary named unknowns.
    Named,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarSpace {
    layout: Layout,
    names: Arc<[String]>,
}

impl VarSpace {
    pub fn corner(r: usize, k: usize, n: usize) -> Self {
        let names: Vec<String> = (1..=r)
            .map(|i| format!("x{i}"))
            .chain((1..=k).map(|i| format!("y{i}")))
            .chain((1..=n).map(|i| format!("q{i}")))
            .collect();
        Self { layout: Layout::Corner { r, k, n }, names: names.into() }
    }

    pub fn phase(n: usize) -> Self {
        let names: Vec<String> = (1..=n)
            .map(|i| format!("Q{i}"))
            .chain((1..=n).map(|i| format!("P{i}")))
            .collect();
        Self { layout: Layout::Phase { n }, names: names.into() }
    }

    pub fn cotangent(n: usize) -> Self {
        let names: Vec<String> = (1..=n)
            .map(|i| format!("q{i}"))
            .chain((1..=n).map(|i| format!("p{i}")))
            .collect();
        Self { layout: Layout::Cotangent { n }, names: names.into() }
    }

    pub fn named<S: AsRef<str>>(names: &[S]) -> Self {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        Self { layout: Layout::Named, names: names.into() }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Looks a variable up by name. In a corner space with a single corner
    /// (or fibre) variable, `x` (or `y`) is accepted for `x1` (or `y1`).
    pub fn index_of(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Some(i);
        }
        match (self.layout, name) {
            (Layout::Corner { r: 1, .. }, "x") => Some(0),
            (Layout::Corner { r, k: 1, .. }, "y") => Some(r),
            _ => None,
        }
    }

    /// `(r, k, n)` of a corner space; `None` otherwise.
    pub fn rkn(&self) -> Option<(usize, usize, usize)> {
        match self.layout {
            Layout::Corner { r, k, n } => Some((r, k, n)),
            _ => None,
        }
    }

    fn corner_dims(&self) -> (usize, usize, usize) {
        self.rkn().expect("corner variable space required")
    }

    /// Corner variable `x_{i+1}`.
    pub fn x(&self, i: usize) -> usize {
        let (r, _, _) = self.corner_dims();
        assert!(i < r);
        i
    }

    pub fn y(&self, j: usize) -> usize {
        let (r, k, _) = self.corner_dims();
        assert!(j < k);
        r + j
    }

    pub fn q(&self, j: usize) -> usize {
        let (r, k, n) = self.corner_dims();
        assert!(j < n);
        r + k + j
    }
}

/// Exponent vector with the canonical graded order: total degree first, then
/// lexicographic on the exponents (so `x2^2 < x1*x2 < x1^2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn from_exponents(e: Vec<u32>) -> Self {
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// All monomials in `nvars` variables of total degree at most `max_degree`,
    /// in ascending canonical order.
    pub fn all_up_to(nvars: usize, max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut layer = Vec::new();
            let mut cur = vec![0u32; nvars];
            fill_degree(&mut cur, 0, d, &mut layer);
            layer.sort();
            out.extend(layer);
        }
        out
    }

    pub fn to_string_in(&self, space: &VarSpace) -> String {
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(space.name(i).to_string()),
                _ => parts.push(format!("{}^{}", space.name(i), e)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

fn fill_degree(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Monomial>) {
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    if pos == cur.len() - 1 {
        cur[pos] = remaining;
        out.push(Monomial(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in 0..=remaining {
        cur[pos] = e;
        fill_degree(cur, pos + 1, remaining - e, out);
    }
    cur[pos] = 0;
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

/// Sparse polynomial with exact rational coefficients. No stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    space: VarSpace,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(space: &VarSpace) -> Self {
        Self { space: space.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(space: &VarSpace, c: Rational) -> Self {
        let mut p = Self::zero(space);
        p.add_term(Monomial::one(space.len()), c);
        p
    }

    pub fn one(space: &VarSpace) -> Self {
        Self::constant(space, Rational::one())
    }

    pub fn var(space: &VarSpace, i: usize) -> Self {
        Self::monomial(space, Monomial::var(space.len(), i), Rational::one())
    }

    pub fn var_named(space: &VarSpace, name: &str) -> Result<Self, PolyError> {
        let i = space
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(Self::var(space, i))
    }

    pub fn monomial(space: &VarSpace, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.0.len(), space.len(), "exponent vector length mismatch");
        let mut p = Self::zero(space);
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(space: &VarSpace, it: I) -> Self {
        let mut p = Self::zero(space);
        for (m, c) in it {
            assert_eq!(m.0.len(), space.len(), "exponent vector length mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn space(&self) -> &VarSpace {
        &self.space
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coeff_of(&self, exps: &[u32]) -> Rational {
        self.coeff(&Monomial(exps.to_vec()))
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.space.len()))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Smallest total degree of a term; `None` for zero.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    /// Degree in variable `i` alone.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.space);
        }
        Poly {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.space);
        }
        Poly {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(t, v)| (t.mul(m), v * c)).collect(),
        }
    }

    fn check_space(&self, other: &Poly) {
        assert_eq!(self.space, other.space, "polynomials live in different variable spaces");
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        let d = self.degree().unwrap_or(0) + other.degree().unwrap_or(0);
        if d > MAX_DEGREE {
            return Err(PolyError::DegreeBound(d));
        }
        Ok(self * other)
    }

    pub fn pow(&self, e: u32) -> Result<Poly, PolyError> {
        let d = self.degree().unwrap_or(0).saturating_mul(e);
        if d > MAX_DEGREE {
            return Err(PolyError::DegreeBound(d));
        }
        let mut acc = Poly::one(&self.space);
        for _ in 0..e {
            acc = &acc * self;
        }
        Ok(acc)
    }

    /// Exact partial derivative with respect to variable `i`.
    pub fn differentiate(&self, i: usize) -> Poly {
        assert!(i < self.space.len(), "variable index out of range");
        let mut out = Poly::zero(&self.space);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.0[i] -= 1;
            out.add_term(nm, c * int(e as i64));
        }
        out
    }

    pub fn differentiate_named(&self, name: &str) -> Result<Poly, PolyError> {
        let i = self
            .space
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(self.differentiate(i))
    }

    /// Drops every term of total degree above `degree`.
    pub fn truncate(&self, degree: u32) -> Poly {
        Poly {
            space: self.space.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Homogeneous component of the given degree.
    pub fn homogeneous_part(&self, degree: u32) -> Poly {
        Poly {
            space: self.space.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Keeps only the terms accepted by `keep`.
    pub fn filter_terms(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Poly {
        Poly {
            space: self.space.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Substitutes polynomials (all living in `target`) for variables.
    /// Variables without an entry are mapped to the variable of the same name
    /// in `target`.
    pub fn compose(&self, subst: &BTreeMap<usize, Poly>, target: &VarSpace) -> Result<Poly, PolyError> {
        for p in subst.values() {
            if p.space != *target {
                return Err(PolyError::SpaceMismatch);
            }
        }
        let mut images: Vec<Poly> = Vec::with_capacity(self.space.len());
        for i in 0..self.space.len() {
            if let Some(p) = subst.get(&i) {
                images.push(p.clone());
            } else {
                let j = target.index_of(self.space.name(i)).ok_or(PolyError::SpaceMismatch)?;
                images.push(Poly::var(target, j));
            }
        }
        let bound: u32 = self
            .terms
            .keys()
            .map(|m| {
                m.0.iter()
                    .zip(&images)
                    .map(|(e, p)| e * p.degree().unwrap_or(0))
                    .sum::<u32>()
            })
            .max()
            .unwrap_or(0);
        if bound > MAX_DEGREE {
            return Err(PolyError::DegreeBound(bound));
        }
        let mut powers: Vec<Vec<Poly>> = images.iter().map(|p| vec![Poly::one(target), p.clone()]).collect();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut term = Poly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &images[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][e as usize];
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Substitutes by variable name; every value must live in `target`.
    pub fn compose_named(&self, subst: &[(&str, Poly)], target: &VarSpace) -> Result<Poly, PolyError> {
        let mut map = BTreeMap::new();
        for (name, p) in subst {
            let i = self
                .space
                .index_of(name)
                .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
            map.insert(i, p.clone());
        }
        self.compose(&map, target)
    }

    /// Re-expresses the polynomial in a space containing all of its used
    /// variables (matched by name). Unused variables may be absent.
    pub fn embed(&self, target: &VarSpace) -> Result<Poly, PolyError> {
        let mut map = Vec::with_capacity(self.space.len());
        let used: Vec<bool> = (0..self.space.len())
            .map(|i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect();
        for i in 0..self.space.len() {
            map.push(match target.index_of(self.space.name(i)) {
                Some(j) => Some(j),
                None if !used[i] => None,
                None => return Err(PolyError::UnknownVariable(self.space.name(i).to_string())),
            });
        }
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; target.len()];
            for (i, &ei) in m.0.iter().enumerate() {
                if let Some(j) = map[i] {
                    e[j] += ei;
                }
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Sets variable `i` to the rational value `v` (the variable stays in the
    /// space but no longer occurs).
    pub fn substitute_value(&self, i: usize, v: &Rational) -> Poly {
        let mut out = Poly::zero(&self.space);
        for (m, c) in &self.terms {
            let e = m.0[i];
            let mut nm = m.clone();
            nm.0[i] = 0;
            let mut f = c.clone();
            for _ in 0..e {
                f *= v;
            }
            out.add_term(nm, f);
        }
        out
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.space.len());
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = to_f64(c);
                for (x, &e) in point.iter().zip(&m.0) {
                    if e > 0 {
                        t *= x.powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.space.len());
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    /// True when no term involves any of the given variables.
    pub fn independent_of(&self, vars: &[usize]) -> bool {
        self.terms.keys().all(|m| vars.iter().all(|&v| m.0[v] == 0))
    }

    /// Largest absolute coefficient, as f64 (0 for the zero polynomial).
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| to_f64(&c.abs())).fold(0.0, f64::max)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let is_one = m.degree() == 0;
            if is_one {
                write!(f, "{}", a)?;
            } else if a.is_one() {
                write!(f, "{}", m.to_string_in(&self.space))?;
            } else {
                write!(f, "{}*{}", a, m.to_string_in(&self.space))?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        self.check_space(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        self.check_space(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        self.check_space(rhs);
        let mut out = Poly::zero(&self.space);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_rat(c: &Rational) -> String {
    c.to_string()
}
