//! Truncated-jet linear algebra for reticular equivalence orbits.
//!
//! Every computation works in the finite-dimensional space of polynomials of
//! total degree at most `N`, with the monomials of degree `<= N` as a basis in
//! ascending canonical order.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::GermError;
use crate::germ::{GeneratingFamily, Germ};
use crate::linalg::{solve, Echelon, LinearSolution, SparseRow};
use crate::poly::{rat, Monomial, Poly, Rational, VarSpace};

/// Highest jet order any routine will try.
pub const JET_CAP: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    /// Corner-preserving coordinate changes only.
    R,
    /// Coordinate changes plus added constants.
    RPlus,
    /// Coordinate changes, constants and multiplication by a unit.
    C,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::R => "R",
            Relation::RPlus => "R+",
            Relation::C => "C",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "r" => Ok(Relation::R),
            "r+" | "rplus" => Ok(Relation::RPlus),
            "c" => Ok(Relation::C),
            _ => Err(format!("unknown relation `{s}` (expected r, r+ or c)")),
        }
    }
}

/// Default jet order for a germ in `nvars` variables.
pub fn default_jet_order(nvars: usize) -> u32 {
    (nvars as u32 + 3).max(7)
}

/// The monomial basis of degree-`<= N` jets.
#[derive(Clone, Debug)]
pub struct JetBasis {
    space: VarSpace,
    degree: u32,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl JetBasis {
    pub fn new(space: &VarSpace, degree: u32) -> Self {
        let monomials = Monomial::all_up_to(space.len(), degree);
        let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Self { space: space.clone(), degree, monomials, index }
    }

    pub fn space(&self) -> &VarSpace {
        &self.space
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn column(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Coordinates of the degree-`<= N` jet of `p`.
    pub fn row(&self, p: &Poly) -> SparseRow {
        p.terms()
            .filter_map(|(m, c)| self.column(m).map(|i| (i, c.clone())))
            .collect()
    }

    pub fn unit(&self, i: usize) -> SparseRow {
        let mut r = SparseRow::new();
        r.insert(i, Rational::one());
        r
    }
}

/// A subspace of degree-`<= N` jets together with its echelon form.
#[derive(Clone, Debug)]
pub struct JetSubspace {
    basis: JetBasis,
    echelon: Echelon,
}

impl JetSubspace {
    pub fn new(basis: JetBasis) -> Self {
        let n = basis.len();
        Self { basis, echelon: Echelon::new(n) }
    }

    pub fn basis(&self) -> &JetBasis {
        &self.basis
    }

    pub fn space(&self) -> &VarSpace {
        self.basis.space()
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree()
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.ambient_dim()
    }

    /// Adds the jet of `p`; returns whether the rank grew.
    pub fn add(&mut self, p: &Poly) -> bool {
        let row = self.basis.row(p);
        self.echelon.insert(row)
    }

    pub fn contains(&self, p: &Poly) -> bool {
        self.echelon.contains(self.basis.row(p))
    }

    pub fn contains_monomial(&self, m: &Monomial) -> bool {
        match self.basis.column(m) {
            Some(i) => self.echelon.contains_unit(i),
            None => true,
        }
    }

    /// Reduced row-echelon rows as polynomials.
    pub fn rref(&self) -> Vec<Poly> {
        self.echelon
            .rref()
            .into_iter()
            .map(|row| {
                Poly::from_terms(
                    self.space(),
                    row.into_iter().map(|(i, c)| (self.basis.monomials[i].clone(), c)),
                )
            })
            .collect()
    }

    /// Greedy completion: walks monomials in ascending order and keeps each
    /// one not already in the span of the subspace and the earlier picks.
    /// The result is listed by degree, then with `x1` before `x2`.
    pub fn complement(&self) -> Vec<Monomial> {
        let mut e = self.echelon.clone();
        let mut out = Vec::new();
        for (i, m) in self.basis.monomials.iter().enumerate() {
            if e.rank() == self.basis.len() {
                break;
            }
            if e.insert(self.basis.unit(i)) {
                out.push(m.clone());
            }
        }
        out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| b.exponents().cmp(a.exponents())));
        out
    }
}

/// Adds `m * g` truncated at degree `n` for every monomial `m` of degree
/// `<= n - order(g)`.
fn add_module_multiples(sub: &mut JetSubspace, g: &Poly, multipliers: &[Monomial]) {
    let n = sub.degree();
    let Some(ord) = g.order() else { return };
    if ord > n {
        return;
    }
    let one = Rational::one();
    for m in multipliers.iter().take_while(|m| m.degree() + ord <= n) {
        let p = g.mul_monomial(m, &one).truncate(n);
        sub.add(&p);
    }
}

/// Generators `x_i df/dx_i` and `df/dy_j` of the module part.
fn module_generators(f: &Poly, r: usize, k: usize) -> Vec<Poly> {
    let mut gens = Vec::with_capacity(r + k);
    for i in 0..r {
        gens.push(&Poly::var(f.space(), i) * &f.differentiate(i));
    }
    for j in 0..k {
        gens.push(f.differentiate(r + j));
    }
    gens
}

/// Tangent space of the orbit of `f` under `relation`, within jets of degree
/// `<= n`.
pub fn tangent_space(f: &Germ, relation: Relation, n: u32) -> JetSubspace {
    let basis = JetBasis::new(f.space(), n);
    let multipliers = basis.monomials().to_vec();
    let mut sub = JetSubspace::new(basis);
    for g in module_generators(f.poly(), f.r(), f.k()) {
        add_module_multiples(&mut sub, &g, &multipliers);
    }
    match relation {
        Relation::R => {}
        Relation::RPlus => {
            sub.add(&Poly::one(f.space()));
        }
        Relation::C => {
            sub.add(&Poly::one(f.space()));
            sub.add(&f.poly().truncate(n));
        }
    }
    sub
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CodimValue {
    Finite(usize),
    ExceedsBound,
}

impl CodimValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            CodimValue::Finite(v) => Some(v),
            CodimValue::ExceedsBound => None,
        }
    }
}

impl fmt::Display for CodimValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodimValue::Finite(v) => write!(f, "{v}"),
            CodimValue::ExceedsBound => f.write_str("exceeds bound"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodimResult {
    pub relation: Relation,
    pub value: CodimValue,
    /// Jet order the value was read at.
    pub jet_order: u32,
    /// Whether the value agreed at `jet_order` and `jet_order + 1`.
    pub stabilized: bool,
    pub cobasis: Vec<Monomial>,
}

fn raw_codim(f: &Germ, relation: Relation, n: u32) -> (usize, Vec<Monomial>) {
    let t = tangent_space(f, relation, n);
    (t.ambient_dim() - t.rank(), t.complement())
}

/// Codimension of the orbit of `f`, starting at jet order `n` and raising it
/// until two consecutive orders agree or the cap is reached.
pub fn codimension(f: &Germ, relation: Relation, n: u32) -> CodimResult {
    let start = n.max(2);
    let (mut prev, mut prev_cobasis) = raw_codim(f, relation, start);
    let mut order = start;
    while order < JET_CAP {
        let (next, next_cobasis) = raw_codim(f, relation, order + 1);
        if next == prev {
            return CodimResult {
                relation,
                value: CodimValue::Finite(prev),
                jet_order: order,
                stabilized: true,
                cobasis: prev_cobasis,
            };
        }
        order += 1;
        prev = next;
        prev_cobasis = next_cobasis;
    }
    CodimResult { relation, value: CodimValue::ExceedsBound, jet_order: order, stabilized: false, cobasis: prev_cobasis }
}

/// Codimension at the default jet order.
pub fn codimension_default(f: &Germ, relation: Relation) -> CodimResult {
    codimension(f, relation, default_jet_order(f.nvars()))
}

/// The cobasis part of [`codimension`].
pub fn residual_cobasis(f: &Germ, relation: Relation, n: u32) -> Result<Vec<Monomial>, CodimValue> {
    let res = codimension(f, relation, n);
    match res.value {
        CodimValue::Finite(_) => Ok(res.cobasis),
        CodimValue::ExceedsBound => Err(CodimValue::ExceedsBound),
    }
}

/// `f + sum q_i m_i` over the nonconstant monomials of the C-cobasis.
pub fn build_stable_unfolding(f: &Germ) -> Result<GeneratingFamily, CodimValue> {
    let cobasis = residual_cobasis(f, Relation::C, default_jet_order(f.nvars()))?;
    let cobasis: Vec<Monomial> = cobasis.into_iter().filter(|m| m.degree() > 0).collect();
    let (r, k) = (f.r(), f.k());
    let n = cobasis.len();
    let space = VarSpace::corner(r, k, n);
    let mut poly = f.poly().embed(&space).expect("same variables");
    for (j, m) in cobasis.iter().enumerate() {
        let mut e = m.exponents().to_vec();
        e.resize(space.len(), 0);
        e[r + k + j] = 1;
        poly = &poly + &Poly::monomial(&space, Monomial::from_exponents(e), Rational::one());
    }
    Ok(GeneratingFamily::new(poly).expect("unfolding of a germ is a family"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VersalityReport {
    pub versal: bool,
    pub jet_order: u32,
    /// Monomials completing the spanned jets to all jets; empty when versal.
    pub missing: Vec<Monomial>,
}

/// Infinitesimal versality: the R-tangent space of the core germ plus the
/// real span of `1`, `f` and the initial velocities fills all jets.
pub fn check_infinitesimal_versality(family: &GeneratingFamily, n: u32) -> VersalityReport {
    let f = family.core();
    let mut t = tangent_space(f, Relation::R, n);
    t.add(&Poly::one(f.space()));
    t.add(&f.poly().truncate(n));
    for v in family.initial_velocities() {
        t.add(&v.truncate(n));
    }
    let missing = t.complement();
    VersalityReport { versal: missing.is_empty(), jet_order: n, missing }
}

/// Infinitesimal stability: the module generated by `x_i dF/dx_i`, `dF/dy_j`
/// over all variables, plus the module over parameter-only functions
/// generated by `1`, `F` and `dF/dq_i`, fills all jets in `(x, y, q)`.
pub fn check_infinitesimal_stability(family: &GeneratingFamily, n: u32) -> bool {
    let (r, k, np) = family.rkn();
    let poly = family.poly();
    if poly.is_zero() {
        return false;
    }
    let basis = JetBasis::new(family.space(), n);
    let all = basis.monomials().to_vec();
    let param_only: Vec<Monomial> = all
        .iter()
        .filter(|m| (0..r + k).all(|i| m.exp(i) == 0))
        .cloned()
        .collect();
    let mut sub = JetSubspace::new(basis);
    for g in module_generators(poly, r, k) {
        add_module_multiples(&mut sub, &g, &all);
    }
    let mut scalars = vec![Poly::one(family.space()), poly.clone()];
    for j in 0..np {
        scalars.push(poly.differentiate(r + k + j));
    }
    for g in &scalars {
        add_module_multiples(&mut sub, g, &param_only);
    }
    sub.is_full()
}

/// Positive weights `w` with `sum w_i a_i = 1` on the support of `f`, in the
/// given coordinates. Variables not appearing in `f` get weight 1/2.
pub fn is_quasihomogeneous(f: &Germ) -> Result<Option<Vec<Rational>>, GermError> {
    if f.is_zero() {
        return Err(GermError::ZeroGerm);
    }
    let nv = f.nvars();
    let present: Vec<usize> = (0..nv).filter(|&i| f.poly().degree_in(i) > 0).collect();
    let rows: Vec<SparseRow> = f
        .poly()
        .terms()
        .map(|(m, _)| {
            present
                .iter()
                .enumerate()
                .filter(|(_, &v)| m.exp(v) > 0)
                .map(|(c, &v)| (c, Rational::from_integer(m.exp(v).into())))
                .collect()
        })
        .collect();
    let rhs = vec![Rational::one(); rows.len()];
    let np = present.len();
    let LinearSolution::Affine { particular, null_space } = solve(&rows, &rhs, np) else {
        return Ok(None);
    };
    let candidate = least_norm(&particular, &null_space)
        .filter(|w| w.iter().all(|x| x.is_positive()))
        .or_else(|| vertex_average(&rows, &rhs, np).filter(|w| w.iter().all(|x| x.is_positive())));
    Ok(candidate.map(|w| {
        let mut out = vec![rat(1, 2); nv];
        for (c, &v) in present.iter().enumerate() {
            out[v] = w[c].clone();
        }
        out
    }))
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).fold(Rational::zero(), |s, t| s + t)
}

/// Orthogonal projection of `p` onto the complement of the null space.
fn least_norm(p: &[Rational], null_space: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    if null_space.is_empty() {
        return Some(p.to_vec());
    }
    let k = null_space.len();
    let gram: Vec<SparseRow> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (j, dot(&null_space[i], &null_space[j])))
                .filter(|(_, v)| !v.is_zero())
                .collect()
        })
        .collect();
    let rhs: Vec<Rational> = null_space.iter().map(|v| dot(v, p)).collect();
    let LinearSolution::Affine { particular: c, .. } = solve(&gram, &rhs, k) else { return None };
    let mut w = p.to_vec();
    for (ci, v) in c.iter().zip(null_space) {
        for (wj, vj) in w.iter_mut().zip(v) {
            *wj -= ci * vj;
        }
    }
    Some(w)
}

/// Average of the nonnegative basic solutions of `A w = b`, or `None` when
/// there are none.
fn vertex_average(rows: &[SparseRow], rhs: &[Rational], ncols: usize) -> Option<Vec<Rational>> {
    if ncols > 16 {
        return None;
    }
    let mut sum = vec![Rational::zero(); ncols];
    let mut count = 0i64;
    for mask in 0u32..(1 << ncols) {
        // Columns in `mask` are forced to zero.
        let mut aug: Vec<SparseRow> = rows.to_vec();
        let mut b = rhs.to_vec();
        for c in 0..ncols {
            if mask & (1 << c) != 0 {
                aug.push(std::iter::once((c, Rational::one())).collect());
                b.push(Rational::zero());
            }
        }
        if let LinearSolution::Affine { particular, null_space } = solve(&aug, &b, ncols) {
            if null_space.is_empty() && particular.iter().all(|x| !x.is_negative()) {
                for (s, x) in sum.iter_mut().zip(&particular) {
                    *s += x;
                }
                count += 1;
            }
        }
    }
    if count == 0 {
        return None;
    }
    let inv = Rational::from_integer(count.into()).recip();
    Some(sum.into_iter().map(|s| s * &inv).collect())
}

/// Smallest jet order `N >= 2` whose codimension agrees with order `N + 1`.
pub fn determinacy_stabilization(f: &Germ, relation: Relation) -> CodimValue {
    let mut prev = raw_codim(f, relation, 2).0;
    for n in 2..JET_CAP {
        let next = raw_codim(f, relation, n + 1).0;
        if next == prev {
            return CodimValue::Finite(n as usize);
        }
        prev = next;
    }
    CodimValue::ExceedsBound
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str, r: usize, k: usize) -> Germ {
        Germ::parse(s, r, k).unwrap()
    }

    fn names(space: &VarSpace, ms: &[Monomial]) -> Vec<String> {
        ms.iter().map(|m| m.to_string_in(space)).collect()
    }

    #[test]
    fn tangent_space_of_sum_of_squares() {
        let f = g("x1^2+x2^2", 2, 0);
        let t = tangent_space(&f, Relation::C, 4);
        let sp = f.space().clone();
        for s in ["1", "x1^2", "x2^2", "x1^3", "x1^2*x2", "x1*x2^2", "x2^3", "x1^4", "x1^2*x2^2"] {
            assert!(t.contains(&crate::parse_expression(s, &sp).unwrap()), "{s}");
        }
        for s in ["x1", "x2", "x1*x2"] {
            assert!(!t.contains(&crate::parse_expression(s, &sp).unwrap()), "{s}");
        }
    }

    #[test]
    fn tangent_space_zero_germ() {
        let t = tangent_space(&g("0", 2, 0), Relation::C, 4);
        assert_eq!(t.rank(), 1);
    }

    #[test]
    fn codimension_examples() {
        let cases = [
            ("x1^2+x1*x2+1/3*x2^2", 2, 3),
            ("x1^2+x2^2", 2, 3),
            ("x1^2+x1*x2^2+x2^3", 2, 4),
            ("x1^2", 1, 1),
        ];
        for (s, r, want) in cases {
            let res = codimension_default(&g(s, r, 0), Relation::C);
            assert_eq!(res.value, CodimValue::Finite(want), "{s}");
            assert!(res.stabilized);
        }
        assert_eq!(codimension_default(&g("0", 2, 0), Relation::C).value, CodimValue::ExceedsBound);
    }

    #[test]
    fn cobasis_examples() {
        let f = g("x1^2+x1*x2+1/3*x2^2", 2, 0);
        assert_eq!(names(f.space(), &residual_cobasis(&f, Relation::C, 7).unwrap()), ["x1", "x2", "x2^2"]);
        let f = g("x1^2+x2^2", 2, 0);
        assert_eq!(names(f.space(), &residual_cobasis(&f, Relation::C, 7).unwrap()), ["x1", "x2", "x1*x2"]);
        let f = g("x1^3", 1, 0);
        assert_eq!(names(f.space(), &residual_cobasis(&f, Relation::C, 7).unwrap()), ["x1", "x1^2"]);
    }

    #[test]
    fn stable_unfoldings() {
        let u = build_stable_unfolding(&g("x1^2+x1*x2+1/3*x2^2", 2, 0)).unwrap();
        assert_eq!(u.rkn(), (2, 0, 3));
        let v: Vec<String> = u.initial_velocities().iter().map(|p| p.to_string()).collect();
        assert_eq!(v, ["x1", "x2", "x2^2"]);
        let u = build_stable_unfolding(&g("x1^2", 1, 0)).unwrap();
        assert_eq!(u.to_string(), "x1^2 + x1*q1");
    }

    #[test]
    fn versality_examples() {
        let fam = |s: &str, n| GeneratingFamily::parse(s, 2, 0, n).unwrap();
        assert!(check_infinitesimal_versality(&fam("x1^2+x2^2+q1*x1+q2*x2+q3*x1*x2", 3), 7).versal);
        let r = check_infinitesimal_versality(&fam("x1^2+x2^2+q1*x1+q2*x2", 2), 7);
        assert!(!r.versal);
        assert_eq!(names(&VarSpace::corner(2, 0, 0), &r.missing), ["x1*x2"]);
        let r = check_infinitesimal_versality(&fam("x1^2+x1*x2+x2^2+q1*x1+q2*x2", 2), 7);
        assert_eq!(names(&VarSpace::corner(2, 0, 0), &r.missing), ["x2^2"]);
    }

    #[test]
    fn stability_examples() {
        let fam = |s: &str, n| GeneratingFamily::parse(s, 2, 0, n).unwrap();
        assert!(check_infinitesimal_stability(&fam("x1^2+x2^2+q1*x1+q2*x2+q3*x1*x2", 3), 5));
        assert!(!check_infinitesimal_stability(&fam("x1^2+x2^2+q1*x1", 1), 5));
        assert!(!check_infinitesimal_stability(&fam("0", 1), 5));
    }

    #[test]
    fn quasihomogeneous_weights() {
        let w = is_quasihomogeneous(&g("x1^2+x2^3", 2, 0)).unwrap().unwrap();
        assert_eq!(w, vec![rat(1, 2), rat(1, 3)]);
        let w = is_quasihomogeneous(&g("x1^2+x1*x2+x2^2", 2, 0)).unwrap().unwrap();
        assert_eq!(w, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(is_quasihomogeneous(&g("x1^2+x1*x2+x2^3", 2, 0)).unwrap(), None);
        assert!(is_quasihomogeneous(&g("0", 2, 0)).is_err());
        let w = is_quasihomogeneous(&g("x1^2*x2^2", 2, 0)).unwrap().unwrap();
        assert_eq!(w, vec![rat(1, 4), rat(1, 4)]);
    }

    #[test]
    fn determinacy_examples() {
        let d = determinacy_stabilization(&g("x1^2+x2^2", 2, 0), Relation::C).finite().unwrap();
        assert!(d <= 4);
        let d = determinacy_stabilization(&g("x1^2+x1*x2+1/3*x2^2", 2, 0), Relation::C).finite().unwrap();
        assert!(d <= 4);
        assert_eq!(determinacy_stabilization(&g("0", 2, 0), Relation::C), CodimValue::ExceedsBound);
    }
}
