//! Recognition of germs against the normal-form tables.
//!
//! Recognition works from invariants of the jet: quadratic rank, the ratio
//! `mu = c12^2 / (4 c11 c22)`, signs of leading coefficients on the corner
//! axes and on kernel directions, and the C-codimension. No equivalence is
//! constructed.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::ClassifyError;
use crate::germ::{GeneratingFamily, Germ};
use crate::localalg::{codimension_default, default_jet_order, is_quasihomogeneous, CodimValue, Relation};
use crate::poly::{int, rat, to_f64, Monomial, Poly, Rational, VarSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(c: &Rational) -> Option<Sign> {
        if c.is_positive() {
            Some(Sign::Plus)
        } else if c.is_negative() {
            Some(Sign::Minus)
        } else {
            None
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn value(self) -> Rational {
        match self {
            Sign::Plus => int(1),
            Sign::Minus => int(-1),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Region of the modulus `a` in `x1^2 +- x1*x2 + a*x2^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ModulusRegion {
    /// `0 < a < 1/4`
    Low,
    /// `a > 1/4`
    High,
    /// `a < 0`
    Negative,
}

impl ModulusRegion {
    pub fn of(a: &Rational) -> Option<ModulusRegion> {
        let quarter = rat(1, 4);
        if a.is_negative() {
            Some(ModulusRegion::Negative)
        } else if a.is_zero() || *a == quarter {
            None
        } else if *a < quarter {
            Some(ModulusRegion::Low)
        } else {
            Some(ModulusRegion::High)
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            ModulusRegion::Low => "+,1",
            ModulusRegion::High => "+,2",
            ModulusRegion::Negative => "-",
        }
    }

    /// Coefficient of `x2^2` in the fixed weak representative.
    pub fn weak_coefficient(self) -> Rational {
        match self {
            ModulusRegion::Low => rat(1, 5),
            ModulusRegion::High => int(1),
            ModulusRegion::Negative => int(-1),
        }
    }
}

/// Normal-form families. Sign choices are carried separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Group {
    /// `x1^2 +- x1*x2 + a*x2^2`
    B22a(ModulusRegion),
    /// `x1^2 +- x2^2`
    B22Zero,
    /// `(x1 +- x2)^2 +- x2^3`
    B223,
    /// `x1^2 +- x1*x2 +- x2^3`
    B23,
    /// `x1^3 +- x1*x2 +- x2^2`
    B32,
    /// `x1^2 +- x1*x2^2 +- x2^3`
    B23Prime,
    /// `x1^3 +- x1^2*x2 +- x2^2`
    B32Prime,
    /// `+-y^3 + x1*y +- x2*y + x2^2`
    C32,
    /// `+-y^3 + x1*y +- x2*y^2 + x2^2`
    C321,
    /// `+-y^3 + x2*y +- x1*y^2 + x1^2`
    C322,
    /// `x^l` on the half-line.
    B(u32),
    /// `x*y + e*y^l`
    C(u32),
    /// `x^2 + y^3`
    F4,
}

impl Group {
    /// Number of sign slots in the label.
    pub fn sign_count(self) -> usize {
        match self {
            Group::B22a(_) | Group::B22Zero | Group::C(_) => 1,
            Group::B(_) | Group::F4 => 0,
            _ => 2,
        }
    }

    pub fn corner_dim(self) -> usize {
        match self {
            Group::B(_) | Group::C(_) | Group::F4 => 1,
            _ => 2,
        }
    }

    pub fn fibre_dim(self) -> usize {
        match self {
            Group::C32 | Group::C321 | Group::C322 | Group::C(_) | Group::F4 => 1,
            _ => 0,
        }
    }

    pub fn modulus_count(self) -> usize {
        matches!(self, Group::B22a(_)) as usize
    }

    /// Codimension printed in the table, where there is one.
    pub fn table_codim(self) -> Option<usize> {
        match self {
            Group::B22a(_) | Group::B22Zero | Group::B223 | Group::B23 | Group::B32 | Group::C32 => Some(3),
            Group::B23Prime | Group::B32Prime | Group::C321 | Group::C322 => Some(4),
            Group::B(l) => Some(l as usize - 1),
            Group::C(_) | Group::F4 => None,
        }
    }

    /// Label in the caustic regime, e.g. `B_{2,2,a}^{+,+,2}`.
    pub fn label(self, signs: &[Sign]) -> String {
        assert_eq!(signs.len(), self.sign_count(), "wrong number of signs for {self:?}");
        let s = |i: usize| signs[i].symbol();
        match self {
            Group::B22a(reg) => format!("B_{{2,2,a}}^{{{},{}}}", s(0), reg.suffix()),
            Group::B22Zero => format!("B_{{2,2}}^{{{},0}}", s(0)),
            Group::B223 => format!("B_{{2,2,3}}^{{{},{}}}", s(0), s(1)),
            Group::B23 => format!("B_{{2,3}}^{{{},{}}}", s(0), s(1)),
            Group::B32 => format!("B_{{3,2}}^{{{},{}}}", s(0), s(1)),
            Group::B23Prime => format!("B_{{2,3'}}^{{{},{}}}", s(0), s(1)),
            Group::B32Prime => format!("B_{{3,2'}}^{{{},{}}}", s(0), s(1)),
            Group::C32 => format!("C_{{3,2}}^{{{},{}}}", s(0), s(1)),
            Group::C321 => format!("C_{{3,2,1}}^{{{},{}}}", s(0), s(1)),
            Group::C322 => format!("C_{{3,2,2}}^{{{},{}}}", s(0), s(1)),
            Group::B(l) => format!("B_{{{l}}}"),
            Group::C(l) => format!("C_{{{l}}}^{{{}}}", s(0)),
            Group::F4 => "F_{4}".into(),
        }
    }

    /// Label in the weak regime: the modulus index is dropped.
    pub fn weak_label(self, signs: &[Sign]) -> String {
        match self {
            Group::B22a(reg) => format!("B_{{2,2}}^{{{},{}}}", signs[0].symbol(), reg.suffix()),
            _ => self.label(signs),
        }
    }

    /// Normal-form expression. `a` is only read for the modulus family.
    pub fn normal_form_text(self, signs: &[Sign], a: Option<&Rational>) -> String {
        let s = |i: usize| signs[i].symbol();
        match self {
            Group::B22a(reg) => {
                let a = a.cloned().unwrap_or_else(|| reg.weak_coefficient());
                format!("x1^2 {} x1*x2 + ({})*x2^2", s(0), a)
            }
            Group::B22Zero => format!("x1^2 {} x2^2", s(0)),
            Group::B223 => format!("(x1 {} x2)^2 {} x2^3", s(0), s(1)),
            Group::B23 => format!("x1^2 {} x1*x2 {} x2^3", s(0), s(1)),
            Group::B32 => format!("x1^3 {} x1*x2 {} x2^2", s(0), s(1)),
            Group::B23Prime => format!("x1^2 {} x1*x2^2 {} x2^3", s(0), s(1)),
            Group::B32Prime => format!("x1^3 {} x1^2*x2 {} x2^2", s(0), s(1)),
            Group::C32 => format!("{}y^3 + x1*y {} x2*y + x2^2", s(0), s(1)),
            Group::C321 => format!("{}y^3 + x1*y {} x2*y^2 + x2^2", s(0), s(1)),
            Group::C322 => format!("{}y^3 + x2*y {} x1*y^2 + x1^2", s(0), s(1)),
            Group::B(l) => format!("x^{l}"),
            Group::C(l) => format!("x*y {} y^{l}", s(0)),
            Group::F4 => "x^2 + y^3".into(),
        }
    }

    pub fn normal_form(self, signs: &[Sign], a: Option<&Rational>) -> Germ {
        Germ::parse(&self.normal_form_text(signs, a), self.corner_dim(), self.fibre_dim())
            .expect("normal forms are well formed")
    }

    /// Unfolding terms appended to the normal form, as listed for the stable
    /// families. For the modulus family this is the two-parameter unfolding.
    pub fn unfolding_text(self) -> &'static str {
        match self {
            Group::B22a(_) => "q1*x1 + q2*x2",
            Group::B22Zero => "q1*x1 + q2*x2 + q3*x1*x2",
            Group::B223 | Group::B23 => "q1*x1 + q2*x2 + q3*x2^2",
            Group::B32 => "q1*x1 + q2*x2 + q3*x1^2",
            Group::B23Prime => "q1*x2^2 + q2*x1*x2 + q3*x2 + q4*x1",
            Group::B32Prime => "q1*x1^2 + q2*x1*x2 + q3*x1 + q4*x2",
            Group::C32 => "q1*y + q2*x1 + q3*x2",
            Group::C321 => "q1*y^2 + q2*y + q3*x1*x2 + q4*x2",
            Group::C322 => "q1*y^2 + q2*y + q3*x1*x2 + q4*x1",
            Group::B(_) | Group::C(_) | Group::F4 => "",
        }
    }

    pub fn parameter_count(self) -> usize {
        self.unfolding_text().matches('q').count()
    }

    /// Generating family `normal form + unfolding terms`.
    pub fn family(self, signs: &[Sign], a: Option<&Rational>) -> Option<GeneratingFamily> {
        let extra = self.unfolding_text();
        if extra.is_empty() {
            return None;
        }
        let text = format!("{} + {}", self.normal_form_text(signs, a), extra);
        Some(
            GeneratingFamily::parse(&text, self.corner_dim(), self.fibre_dim(), self.parameter_count())
                .expect("families are well formed"),
        )
    }
}

/// Accepts either spelling of the cusp-type corner family label.
pub fn canonical_label(label: &str) -> String {
    label.replacen("C_{2,3}", "C_{3,2}", 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    #[serde(rename = "caustic-stable")]
    CausticStable,
    #[serde(rename = "weakly-caustic-stable")]
    WeaklyCausticStable,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::CausticStable => "caustic-stable",
            Regime::WeaklyCausticStable => "weakly-caustic-stable",
        })
    }
}

#[derive(Clone, Debug)]
pub struct NormalFormEntry {
    pub label: String,
    pub group: Group,
    pub signs: Vec<Sign>,
    pub representative: Germ,
    pub family: GeneratingFamily,
    pub codim_caustic: usize,
    pub codim_weak: usize,
    pub modulus_count: usize,
    pub regime: Regime,
    pub figure: Option<String>,
}

impl NormalFormEntry {
    pub fn r(&self) -> usize {
        self.group.corner_dim()
    }

    pub fn k(&self) -> usize {
        self.group.fibre_dim()
    }

    pub fn n(&self) -> usize {
        self.family.rkn().2
    }
}

fn sign_pairs() -> [[Sign; 2]; 4] {
    use Sign::*;
    [[Plus, Plus], [Plus, Minus], [Minus, Plus], [Minus, Minus]]
}

fn weak_figure(group: Group, s: Sign) -> String {
    match group {
        Group::B22a(ModulusRegion::Negative) => "B_{2,2}^{+,-}, B_{2,2}^{-,-}".into(),
        _ => format!("B_{{2,2}}^{{{s},+,1}}, B_{{2,2}}^{{{s},+,2}}"),
    }
}

fn build_catalog() -> Vec<NormalFormEntry> {
    let mut out = Vec::new();
    for region in [ModulusRegion::Low, ModulusRegion::High, ModulusRegion::Negative] {
        for s in [Sign::Plus, Sign::Minus] {
            let group = Group::B22a(region);
            let signs = vec![s];
            out.push(NormalFormEntry {
                label: group.weak_label(&signs),
                group,
                representative: group.normal_form(&signs, None),
                family: group.family(&signs, None).unwrap(),
                codim_caustic: 3,
                codim_weak: 2,
                modulus_count: 1,
                regime: Regime::WeaklyCausticStable,
                figure: Some(weak_figure(group, s)),
                signs,
            });
        }
    }
    let mut push = |group: Group, signs: Vec<Sign>| {
        let label = group.label(&signs);
        let figure = match group {
            Group::B22Zero | Group::B223 | Group::B23 | Group::C32 => Some(label.clone()),
            _ => None,
        };
        let codim = group.table_codim().unwrap();
        out.push(NormalFormEntry {
            label,
            group,
            representative: group.normal_form(&signs, None),
            family: group.family(&signs, None).unwrap(),
            codim_caustic: codim,
            codim_weak: codim,
            modulus_count: 0,
            regime: Regime::CausticStable,
            figure,
            signs,
        });
    };
    push(Group::B22Zero, vec![Sign::Plus]);
    push(Group::B22Zero, vec![Sign::Minus]);
    for g in [
        Group::B223,
        Group::B23,
        Group::B32,
        Group::B23Prime,
        Group::B32Prime,
        Group::C32,
        Group::C321,
        Group::C322,
    ] {
        for p in sign_pairs() {
            push(g, p.to_vec());
        }
    }
    out
}

/// The built-in catalog: the weak modulus representatives followed by the
/// caustic-stable families over all sign choices.
pub fn catalog() -> &'static [NormalFormEntry] {
    static CATALOG: OnceLock<Vec<NormalFormEntry>> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

pub fn find_entry(label: &str) -> Option<&'static NormalFormEntry> {
    let label = canonical_label(label);
    catalog().iter().find(|e| e.label == label)
}

/// `mu = c12^2 / (4 c11 c22)` of a binary quadratic form in `x1, x2`.
pub fn mu_invariant(quadratic: &Poly) -> Result<Option<Rational>, ClassifyError> {
    let q = quadratic.homogeneous_part(2);
    let (c11, c12, c22) = binary_coeffs(&q);
    if c11.is_zero() && c12.is_zero() && c22.is_zero() {
        return Err(ClassifyError::ZeroQuadratic);
    }
    if c11.is_zero() || c22.is_zero() {
        return Ok(None);
    }
    Ok(Some(&c12 * &c12 / (int(4) * &c11 * &c22)))
}

fn binary_coeffs(p: &Poly) -> (Rational, Rational, Rational) {
    let n = p.space().len();
    let e = |a: u32, b: u32| {
        let mut v = vec![0u32; n];
        v[0] = a;
        v[1] = b;
        p.coeff(&Monomial::from_exponents(v))
    };
    (e(2, 0), e(1, 1), e(0, 2))
}

/// Scalings that bring a quadratic germ to its normal form. Only produced for
/// the purely quadratic families.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    /// Multiplier applied to the germ.
    pub factor: f64,
    /// Positive factors `lambda_i` in `x_i -> lambda_i x_i`.
    pub corner_scalings: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub group: Option<Group>,
    pub signs: Vec<Sign>,
    /// Caustic-regime label.
    pub label: Option<String>,
    /// Weak-regime label.
    pub weak_label: Option<String>,
    pub modulus: Option<Rational>,
    pub region: Option<ModulusRegion>,
    pub codim_caustic: CodimValue,
    pub codim_weak: Option<usize>,
    pub modulus_count: usize,
    /// Germ left after splitting off nondegenerate squares in `y`.
    pub reduced: Germ,
    /// Signs of the squares that were split off.
    pub split_squares: Vec<Sign>,
    pub quadratic_rank: usize,
    pub mu: Option<Rational>,
    pub quasihomogeneous_weights: Option<Vec<Rational>>,
    pub normalization: Option<Normalization>,
}

impl ClassificationReport {
    pub fn is_classified(&self) -> bool {
        self.label.is_some()
    }

    /// Whether this report names `entry`, in either regime.
    pub fn matches(&self, entry: &NormalFormEntry) -> bool {
        self.label.as_deref() == Some(entry.label.as_str())
            || self.weak_label.as_deref() == Some(entry.label.as_str())
    }

    pub fn entry(&self) -> Option<&'static NormalFormEntry> {
        catalog().iter().find(|e| self.matches(e))
    }
}

/// Substitutes `value` for the last variable of `p`'s space and drops it,
/// keeping only terms of degree `<= bound`.
fn eliminate_last(p: &Poly, value: &Poly, bound: u32) -> Poly {
    let target = value.space().clone();
    let last = p.space().len() - 1;
    let mut powers = vec![Poly::one(&target)];
    let maxe = p.degree_in(last);
    for e in 1..=maxe as usize {
        let next = (&powers[e - 1] * value).truncate(bound);
        powers.push(next);
    }
    let mut out = Poly::zero(&target);
    for (m, c) in p.terms() {
        let e = m.exponents();
        let rest = Monomial::from_exponents(e[..last].to_vec());
        if rest.degree() > bound {
            continue;
        }
        let t = powers[e[last] as usize].mul_monomial(&rest, c).truncate(bound);
        out = &out + &t;
    }
    out
}

/// Swaps variables `i` and `j` of `p`.
fn swap_vars(p: &Poly, i: usize, j: usize) -> Poly {
    Poly::from_terms(
        p.space(),
        p.terms().map(|(m, c)| {
            let mut e = m.exponents().to_vec();
            e.swap(i, j);
            (Monomial::from_exponents(e), c.clone())
        }),
    )
}

/// Splitting lemma in the fibre variables: repeatedly removes a `y` with a
/// nonzero square coefficient by solving `df/dy = 0` for it. Returns the
/// residual germ and the signs of the removed squares.
pub fn split_fibre_squares(f: &Germ, bound: u32) -> (Germ, Vec<Sign>) {
    let (r, mut k) = (f.r(), f.k());
    let mut p = f.poly().truncate(bound);
    let mut signs = Vec::new();
    loop {
        if k == 0 {
            break;
        }
        let sq = |p: &Poly, a: usize, b: usize| {
            let mut e = vec![0u32; r + k];
            e[r + a] += 1;
            e[r + b] += 1;
            p.coeff(&Monomial::from_exponents(e))
        };
        let mut pick = (0..k).find(|&j| !sq(&p, j, j).is_zero());
        if pick.is_none() {
            // Only mixed terms y_i*y_j: shear y_i -> y_i + y_j to create a square.
            let pair = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).find(|&(i, j)| !sq(&p, i, j).is_zero());
            let Some((i, j)) = pair else { break };
            let mut subst = BTreeMap::new();
            subst.insert(r + i, &Poly::var(p.space(), r + i) + &Poly::var(p.space(), r + j));
            p = p.compose(&subst, &p.space().clone()).expect("linear shear").truncate(bound);
            pick = Some(j);
        }
        let j = pick.unwrap();
        let last = r + k - 1;
        p = swap_vars(&p, r + j, last);
        let c = sq(&p, k - 1, k - 1);
        signs.push(Sign::of(&c).unwrap());
        // y = -(df/dy - 2 c y) / (2 c), iterated to a fixed point in the jet.
        let target = VarSpace::corner(r, k - 1, 0);
        let dy = p.differentiate(last);
        let rest = &dy - &Poly::var(p.space(), last).scale(&(int(2) * &c));
        let factor = -(int(2) * &c).recip();
        let mut y = Poly::zero(&target);
        for _ in 0..=bound {
            let next = eliminate_last(&rest, &y, bound).scale(&factor);
            if next == y {
                break;
            }
            y = next;
        }
        p = eliminate_last(&p, &y, bound);
        k -= 1;
    }
    let reduced = if k == f.k() && p == f.poly().truncate(bound) {
        f.clone()
    } else {
        Germ::new(p).expect("splitting keeps the germ in the square of the maximal ideal")
    };
    (reduced, signs)
}

fn coeff(p: &Poly, e: &[u32]) -> Rational {
    p.coeff_of(e)
}

fn quadratic_rank(p: &Poly) -> usize {
    let n = p.space().len();
    let mut rows = Vec::new();
    for i in 0..n {
        let mut row = crate::linalg::SparseRow::new();
        for j in 0..n {
            let mut e = vec![0u32; n];
            e[i] += 1;
            e[j] += 1;
            let mut c = p.coeff(&Monomial::from_exponents(e));
            if i != j {
                c /= int(2);
            }
            if !c.is_zero() {
                row.insert(j, c);
            }
        }
        rows.push(row);
    }
    crate::linalg::rank_of(&rows, n)
}

struct Recognized {
    group: Group,
    signs: Vec<Sign>,
    modulus: Option<Rational>,
    normalization: Option<Normalization>,
}

fn sgn(c: &Rational) -> Option<Sign> {
    Sign::of(c)
}

fn recognize_corner_pair(f: &Poly) -> Option<Recognized> {
    let (c11, c12, c22) = binary_coeffs(f);
    let zero = |c: &Rational| c.is_zero();
    let plain = |group, signs| Some(Recognized { group, signs, modulus: None, normalization: None });
    match (zero(&c11), zero(&c12), zero(&c22)) {
        (false, false, false) => {
            let a = &c11 * &c22 / (&c12 * &c12);
            let s = sgn(&(&c12 / &c11))?;
            if a == rat(1, 4) {
                // Perfect square: the cubic on the kernel line decides.
                let v = [-&c12 / (int(2) * &c11), Rational::one()];
                let t = sgn(&(f.homogeneous_part(3).eval(&v) / &c11))?;
                return plain(Group::B223, vec![s, t]);
            }
            let region = ModulusRegion::of(&a)?;
            let norm = Normalization {
                factor: 1.0 / to_f64(&c11),
                corner_scalings: vec![1.0, to_f64(&(&c11 / &c12).abs())],
            };
            Some(Recognized { group: Group::B22a(region), signs: vec![s], modulus: Some(a), normalization: Some(norm) })
        }
        (false, true, false) => {
            let s = sgn(&(&c22 / &c11))?;
            let norm = Normalization {
                factor: 1.0 / to_f64(&c11),
                corner_scalings: vec![1.0, to_f64(&(&c11 / &c22).abs()).sqrt()],
            };
            Some(Recognized { group: Group::B22Zero, signs: vec![s], modulus: None, normalization: Some(norm) })
        }
        (false, false, true) => {
            let d = coeff(f, &[0, 3]);
            plain(Group::B23, vec![sgn(&(&c12 / &c11))?, sgn(&(d / &c11))?])
        }
        (true, false, false) => {
            let d = coeff(f, &[3, 0]);
            plain(Group::B32, vec![sgn(&(&c12 * &d))?, sgn(&(&c22 * &d))?])
        }
        (false, true, true) => {
            let e = coeff(f, &[1, 2]);
            let d = coeff(f, &[0, 3]);
            plain(Group::B23Prime, vec![sgn(&(e / &c11))?, sgn(&(d / &c11))?])
        }
        (true, true, false) => {
            let d = coeff(f, &[3, 0]);
            let e = coeff(f, &[2, 1]);
            plain(Group::B32Prime, vec![sgn(&(e * &d))?, sgn(&(&c22 * &d))?])
        }
        _ => None,
    }
}

fn recognize_corner_pair_fibre(f: &Poly) -> Option<Recognized> {
    let c = |e: [u32; 3]| coeff(f, &e);
    let (q11, q12, q22) = (c([2, 0, 0]), c([1, 1, 0]), c([0, 2, 0]));
    let (b1, b2) = (c([1, 0, 1]), c([0, 1, 1]));
    let d = c([0, 0, 3]);
    if d.is_zero() {
        return None;
    }
    let plain = |group, signs| Some(Recognized { group, signs, modulus: None, normalization: None });
    match (b1.is_zero(), b2.is_zero()) {
        (false, false) => {
            let residual = &b1 * &b1 * &q22 - &b1 * &b2 * &q12 + &b2 * &b2 * &q11;
            if residual.is_zero() {
                return None;
            }
            plain(Group::C32, vec![sgn(&(&d * &b1))?, sgn(&(&b1 * &b2))?])
        }
        (false, true) => {
            if q22.is_zero() {
                return None;
            }
            let e = c([0, 1, 2]) - int(3) * &d * &q12 / &b1;
            plain(Group::C321, vec![sgn(&(&d * &b1))?, sgn(&(e * &q22))?])
        }
        (true, false) => {
            if q11.is_zero() {
                return None;
            }
            let e = c([1, 0, 2]) - int(3) * &d * &q12 / &b2;
            plain(Group::C322, vec![sgn(&(&d * &b2))?, sgn(&(e * &q11))?])
        }
        (true, true) => None,
    }
}

fn recognize_half_line(f: &Poly, k: usize) -> Option<Recognized> {
    let plain = |group, signs| Some(Recognized { group, signs, modulus: None, normalization: None });
    match k {
        0 => {
            let l = f.order()?;
            plain(Group::B(l), vec![])
        }
        1 => {
            let b = coeff(f, &[1, 1]);
            if !b.is_zero() {
                let axis = f.filter_terms(|m| m.exp(0) == 0);
                let l = axis.order()?;
                let d = coeff(&axis, &[0, l]);
                let eps = if (l - 1) % 2 == 0 { sgn(&(&b * &d))? } else { Sign::Plus };
                plain(Group::C(l), vec![eps])
            } else if !coeff(f, &[2, 0]).is_zero() && !coeff(f, &[0, 3]).is_zero() {
                plain(Group::F4, vec![])
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Classifies `f` against the normal-form tables.
pub fn classify_germ(f: &Germ) -> Result<ClassificationReport, ClassifyError> {
    let r = f.r();
    if r > 2 {
        return Err(ClassifyError::UnsupportedCorner(r));
    }
    let bound = default_jet_order(f.nvars());
    let (reduced, split_squares) = split_fibre_squares(f, bound);
    let codim = codimension_default(&reduced, Relation::C);
    let p = reduced.poly();
    let recognized = match (r, reduced.k()) {
        (2, 0) => recognize_corner_pair(p),
        (2, 1) => recognize_corner_pair_fibre(p),
        (1, k) => recognize_half_line(p, k),
        _ => None,
    };
    // A pattern only counts if the codimension agrees with the table.
    let recognized = recognized.filter(|rec| match (rec.group.table_codim(), codim.value) {
        (Some(t), CodimValue::Finite(v)) => t == v && (r == 1 || v <= 4),
        (None, CodimValue::Finite(_)) => true,
        (_, CodimValue::ExceedsBound) => false,
    });
    let quasihomogeneous_weights = if reduced.is_zero() { None } else { is_quasihomogeneous(&reduced).ok().flatten() };
    let mu = if r == 2 {
        let corner_only = p.filter_terms(|m| m.exponents()[2..].iter().all(|&e| e == 0));
        mu_invariant(&corner_only).ok().flatten()
    } else {
        None
    };
    let mut report = ClassificationReport {
        group: None,
        signs: Vec::new(),
        label: None,
        weak_label: None,
        modulus: None,
        region: None,
        codim_caustic: codim.value,
        codim_weak: None,
        modulus_count: 0,
        quadratic_rank: quadratic_rank(p),
        reduced,
        split_squares,
        mu,
        quasihomogeneous_weights,
        normalization: None,
    };
    if let Some(rec) = recognized {
        let mc = rec.group.modulus_count();
        report.label = Some(rec.group.label(&rec.signs));
        report.weak_label = Some(rec.group.weak_label(&rec.signs));
        report.region = match rec.group {
            Group::B22a(reg) => Some(reg),
            _ => None,
        };
        report.codim_weak = codim.value.finite().map(|v| v - mc);
        report.modulus_count = mc;
        report.modulus = rec.modulus;
        report.normalization = rec.normalization;
        report.group = Some(rec.group);
        report.signs = rec.signs;
    }
    Ok(report)
}

/// Weak-regime label and a fixed representative for a classified germ.
#[derive(Clone, Debug)]
pub struct WeakClass {
    pub label: String,
    pub representative: Germ,
}

pub fn weak_class(report: &ClassificationReport) -> Result<WeakClass, ClassifyError> {
    let group = report.group.ok_or(ClassifyError::Unmatched)?;
    Ok(WeakClass {
        label: group.weak_label(&report.signs),
        representative: group.normal_form(&report.signs, None),
    })
}
