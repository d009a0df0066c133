//! Orbit-tangency checks for one-parameter families of symplectic jets.
//!
//! Each case carries an explicit family `S_a` on `(T*R^n, 0)`, affine in the
//! modulus `a`, whose velocity `dS_a/da` is the Hamiltonian field of a fixed
//! `f(p)` along `S_a`. The velocity is tangent to the Lagrangian-equivalence
//! orbit iff `f o S_a` can be written as
//! `sum_i h_i(q o S_a) (p_i o S_a) + h_0(q o S_a)` modulo a monomial ideal;
//! with the `h` expanded in monomials this is an exact linear system.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::OrbitError;
use crate::linalg::{rank_of, solve, LinearSolution, SparseRow};
use crate::parse::parse_expression;
use crate::poly::{fmt_rat, Monomial, Poly, Rational, VarSpace};

/// Polynomial map germ `(Q, P) -> (q o S, p o S)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticJet {
    pub n: usize,
    /// `q_1 o S .. q_n o S, p_1 o S .. p_n o S`, over `VarSpace::phase(n)`.
    pub components: Vec<Poly>,
    pub a: Rational,
}

impl SymplecticJet {
    pub fn new(n: usize, components: Vec<Poly>, a: Rational) -> Self {
        assert_eq!(components.len(), 2 * n);
        Self { n, components, a }
    }

    pub fn identity(n: usize) -> Self {
        let sp = VarSpace::phase(n);
        Self::new(n, (0..2 * n).map(|i| Poly::var(&sp, i)).collect(), Rational::zero())
    }

    pub fn space(&self) -> VarSpace {
        VarSpace::phase(self.n)
    }

    pub fn q(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn p(&self, i: usize) -> &Poly {
        &self.components[self.n + i]
    }

    pub fn fixes_origin(&self) -> bool {
        self.components.iter().all(|c| c.constant_term().is_zero())
    }

    /// Pulls back a function of the target cotangent coordinates.
    pub fn pull_back(&self, g: &Poly) -> Result<Poly, OrbitError> {
        let map: BTreeMap<usize, Poly> = self.components.iter().cloned().enumerate().collect();
        Ok(g.compose(&map, &self.space())?)
    }

    /// Pulls back a function of `q` alone (given over `VarSpace::corner(0, 0, n)`).
    pub fn pull_back_q(&self, h: &Poly) -> Result<Poly, OrbitError> {
        let map: BTreeMap<usize, Poly> = (0..self.n).map(|i| (i, self.components[i].clone())).collect();
        Ok(h.compose(&map, &self.space())?)
    }
}

impl fmt::Display for SymplecticJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Coefficient of `dz_a ^ dz_b` (a < b) in the pulled-back canonical form.
fn pulled_back_form(s: &SymplecticJet) -> BTreeMap<(usize, usize), Poly> {
    let m = 2 * s.n;
    let sp = s.space();
    let grads: Vec<Vec<Poly>> = s.components.iter().map(|c| (0..m).map(|v| c.differentiate(v)).collect()).collect();
    let mut out = BTreeMap::new();
    for a in 0..m {
        for b in a + 1..m {
            let mut acc = Poly::zero(&sp);
            for i in 0..s.n {
                let (q, p) = (&grads[i], &grads[s.n + i]);
                acc = &acc + &(&(&q[a] * &p[b]) - &(&q[b] * &p[a]));
            }
            out.insert((a, b), acc);
        }
    }
    out
}

/// Whether `S` pulls `sum dq_i ^ dp_i` back to `sum dQ_i ^ dP_i` exactly.
pub fn symplectic_check(s: &SymplecticJet) -> bool {
    let sp = s.space();
    pulled_back_form(s).into_iter().all(|((a, b), c)| {
        let expected = if b == a + s.n && a < s.n { Poly::one(&sp) } else { Poly::zero(&sp) };
        c == expected
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    B23pp,
    B223pp,
    C32pp,
    B22a,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::B23pp, CaseId::B223pp, CaseId::C32pp, CaseId::B22a];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::B23pp => "B23pp",
            CaseId::B223pp => "B223pp",
            CaseId::C32pp => "C32pp",
            CaseId::B22a => "B22a",
        }
    }

    /// Class label of the germ the case belongs to.
    pub fn class_label(self) -> &'static str {
        match self {
            CaseId::B23pp => "B_{2,3}^{+,+}",
            CaseId::B223pp => "B_{2,2,3}^{+,+}",
            CaseId::C32pp => "C_{3,2}^{+,+}",
            CaseId::B22a => "B_{2,2,a}",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = OrbitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| OrbitError::UnknownCase(s.to_string()))
    }
}

/// One printed tangency computation.
#[derive(Clone, Debug)]
pub struct TangencyCase {
    pub id: CaseId,
    pub n: usize,
    /// Corner dimension `r`: `Q_i P_i` lies in the ideal for `i <= r`.
    pub r: usize,
    /// `S_a = base + a * slope`, componentwise.
    base: Vec<Poly>,
    slope: Vec<Poly>,
    /// Direction Hamiltonian over `VarSpace::cotangent(n)`.
    pub hamiltonian: Poly,
    /// Degree `d` of the `M^d` summand of the ideal used for the verdict.
    pub ideal_degree: u32,
    /// Degree printed with the computation (differs only for `C32pp`).
    pub printed_ideal_degree: u32,
    /// Printed generating function of the canonical relation (metadata).
    pub generating_function: &'static str,
    /// Paper-style names for selected unknowns, keyed by the generic name.
    aliases: Vec<(&'static str, &'static str)>,
}

fn phase_polys(n: usize, texts: &[&str]) -> Vec<Poly> {
    let sp = VarSpace::phase(n);
    texts
        .iter()
        .map(|t| parse_expression(t, &sp).expect("case tables are well formed"))
        .collect()
}

/// The four built-in cases, with their maps transcribed verbatim.
pub fn catalog_case(id: CaseId) -> TangencyCase {
    let cot = |n: usize, t: &str| parse_expression(t, &VarSpace::cotangent(n)).expect("case tables are well formed");
    match id {
        CaseId::B23pp => TangencyCase {
            id,
            n: 3,
            r: 2,
            base: phase_polys(3, &["-2*Q1-Q2-P1", "-Q1-P2+2*P3*Q2", "-P3", "Q1", "Q2", "Q2^2+Q3"]),
            slope: phase_polys(3, &["0", "-3*Q2^2", "0", "0", "0", "0"]),
            hamiltonian: cot(3, "-p2^3"),
            ideal_degree: 4,
            printed_ideal_degree: 4,
            generating_function: "Q1^2+Q1*Q2+a*Q2^3+q1*Q1+q2*Q2+q3*Q2^2+q3*Q3",
            aliases: vec![],
        },
        CaseId::B223pp => TangencyCase {
            id,
            n: 3,
            r: 2,
            base: phase_polys(3, &["-(2*Q1+2*Q2+P1)", "-(2*Q1+2*Q2+P2-2*P3*Q2)", "-P3", "Q1", "Q2", "Q2^2+Q3"]),
            slope: phase_polys(3, &["0", "-3*Q2^2", "0", "0", "0", "0"]),
            hamiltonian: cot(3, "-p2^3"),
            ideal_degree: 4,
            printed_ideal_degree: 4,
            generating_function: "(Q1+Q2)^2+a*Q2^3+q1*Q1+q2*Q2+q3*Q2^2+q3*Q3",
            aliases: vec![
                ("h2[q1*q2]", "b"),
                ("h2[q2^2]", "c"),
                ("h2[q2*q3]", "d"),
                ("h3[q1]", "e"),
                ("h3[q2]", "f"),
                ("h3[q3]", "g"),
            ],
        },
        CaseId::C32pp => TangencyCase {
            id,
            n: 3,
            r: 2,
            base: phase_polys(3, &["-(3*P3^2+Q1+Q2+Q3)", "P3-P1", "P3-P2", "-P3", "Q1", "Q2"]),
            slope: phase_polys(3, &["0", "0", "-2*Q2", "0", "0", "0"]),
            hamiltonian: cot(3, "-p3^2"),
            // At M^3 the printed system is solvable (see `printed_degree`); the
            // 2-jet level of the other three-parameter cases is M^4.
            ideal_degree: 4,
            printed_ideal_degree: 3,
            generating_function: "y^3+Q1*y+Q2*y+a*Q2^2+q1*y+q2*Q1+q3*Q2+y*Q3",
            aliases: vec![
                ("h1[q1]", "b"),
                ("h2[q1]", "c"),
                ("h2[q2]", "d"),
                ("h2[q3]", "e"),
                ("h3[q1]", "f"),
                ("h3[q2]", "g"),
                ("h3[q3]", "h"),
                ("h0[q1^2]", "i"),
                ("h0[q1*q2]", "j"),
                ("h0[q1*q3]", "k"),
            ],
        },
        CaseId::B22a => TangencyCase {
            id,
            n: 2,
            r: 2,
            base: phase_polys(2, &["-(2*Q1+Q2+P1)", "-(Q1+P2)", "Q1", "Q2"]),
            slope: phase_polys(2, &["0", "-2*Q2", "0", "0"]),
            hamiltonian: cot(2, "-p2^2"),
            ideal_degree: 3,
            printed_ideal_degree: 3,
            generating_function: "Q1^2+Q1*Q2+a*Q2^2+q1*Q1+q2*Q2",
            aliases: vec![("h1[q1]", "b"), ("h1[q2]", "c"), ("h2[q1]", "d"), ("h2[q2]", "e")],
        },
    }
}

impl TangencyCase {
    /// The same case, decided modulo `M^d` instead.
    pub fn with_ideal_degree(&self, d: u32) -> TangencyCase {
        TangencyCase { ideal_degree: d, ..self.clone() }
    }

    /// The case with the ideal exactly as printed.
    pub fn printed_degree(&self) -> TangencyCase {
        self.with_ideal_degree(self.printed_ideal_degree)
    }

    pub fn space(&self) -> VarSpace {
        VarSpace::phase(self.n)
    }

    /// `a > 1/4` for the modulus case, `a > 0` otherwise.
    pub fn in_domain(&self, a: &Rational) -> bool {
        match self.id {
            CaseId::B22a => *a > Rational::new(1.into(), 4.into()),
            _ => a.is_positive(),
        }
    }

    fn check_domain(&self, a: &Rational) -> Result<(), OrbitError> {
        if self.in_domain(a) {
            Ok(())
        } else {
            Err(OrbitError::OutOfDomain(fmt_rat(a)))
        }
    }

    /// `S_a` at a rational modulus value.
    pub fn map_at(&self, a: &Rational) -> SymplecticJet {
        let comps = self.base.iter().zip(&self.slope).map(|(b, s)| b + &s.scale(a)).collect();
        SymplecticJet::new(self.n, comps, a.clone())
    }

    /// Hamiltonian field `(df/dp, -df/dq)` of the direction function.
    pub fn hamiltonian_field(&self) -> Vec<Poly> {
        let n = self.n;
        let f = &self.hamiltonian;
        (0..n).map(|i| f.differentiate(n + i)).chain((0..n).map(|i| -f.differentiate(i))).collect()
    }

    /// The ideal `<Q_i P_i : i <= r> + M <Q_j : j > r> + M^d` contains `m`.
    pub fn in_ideal(&self, m: &Monomial) -> bool {
        let n = self.n;
        if m.degree() >= self.ideal_degree {
            return true;
        }
        if (0..self.r.min(n)).any(|i| m.exp(i) > 0 && m.exp(n + i) > 0) {
            return true;
        }
        m.degree() >= 2 && (self.r..n).any(|j| m.exp(j) > 0)
    }

    pub fn reduce(&self, p: &Poly) -> Poly {
        p.filter_terms(|m| !self.in_ideal(m))
    }

    fn unknown_name(&self, slot: usize, m: &Monomial) -> String {
        let generic = format!("h{slot}[{}]", m.to_string_in(&VarSpace::corner(0, 0, self.n)));
        match self.aliases.iter().find(|(g, _)| *g == generic) {
            Some((_, a)) => a.to_string(),
            None => generic,
        }
    }

    /// Monomial ansatz: `h_i` of degree `1..d-1` for `i >= 1`, `h_0` of
    /// degree `2..d-1`.
    pub fn ansatz(&self) -> Vec<Unknown> {
        let top = self.ideal_degree - 1;
        let mut out = Vec::new();
        for slot in 0..=self.n {
            let low = if slot == 0 { 2 } else { 1 };
            let mut monos: Vec<Monomial> =
                Monomial::all_up_to(self.n, top).into_iter().filter(|m| m.degree() >= low).collect();
            monos.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| b.cmp(a)));
            for m in monos {
                out.push(Unknown { name: self.unknown_name(slot, &m), slot, monomial: m });
            }
        }
        out
    }

    /// Multiplier of slot `i`: `p_i o S_a` for `i >= 1`, `1` for `h_0`.
    fn multiplier(&self, s: &SymplecticJet, slot: usize) -> Poly {
        if slot == 0 {
            Poly::one(&s.space())
        } else {
            s.p(slot - 1).clone()
        }
    }

    /// Reduced contribution of one unknown to the right-hand side.
    fn column(&self, s: &SymplecticJet, u: &Unknown) -> Result<Poly, OrbitError> {
        let qs = VarSpace::corner(0, 0, self.n);
        let h = Poly::monomial(&qs, u.monomial.clone(), Rational::one());
        let hs = s.pull_back_q(&h)?;
        Ok(self.reduce(&(&hs * &self.multiplier(s, u.slot))))
    }

    /// Reduced linear combination `sum_i h_i(q o S)(p_i o S) + h_0(q o S)`.
    pub fn representable_target(&self, a: &Rational, h: &[Poly]) -> Result<Poly, OrbitError> {
        let s = self.map_at(a);
        let qs = VarSpace::corner(0, 0, self.n);
        let mut acc = Poly::zero(&s.space());
        for (slot, hi) in h.iter().enumerate().take(self.n + 1) {
            let hi = hi.embed(&qs)?;
            acc = &acc + &(&s.pull_back_q(&hi)? * &self.multiplier(&s, slot));
        }
        Ok(self.reduce(&acc))
    }
}

/// Verifies `S_a` on construction-level identities and returns `dS_a/da`.
pub fn modal_direction(case: &TangencyCase, a: &Rational) -> Result<Vec<Poly>, OrbitError> {
    case.check_domain(a)?;
    let s = case.map_at(a);
    if !s.fixes_origin() {
        return Err(OrbitError::IdentityFailed("S_a(0) != 0".into()));
    }
    if !symplectic_check(&s) {
        return Err(OrbitError::IdentityFailed(format!("{} is not symplectic at a = {}", case.id, fmt_rat(a))));
    }
    let field = case.hamiltonian_field();
    for (i, (x, v)) in field.iter().zip(&case.slope).enumerate() {
        if &s.pull_back(x)? != v {
            return Err(OrbitError::IdentityFailed(format!("component {} of dS_a/da differs from X_f o S_a", i + 1)));
        }
    }
    Ok(case.slope.clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unknown {
    pub name: String,
    /// 0 for `h_0`, `i` for `h_i`.
    pub slot: usize,
    /// Monomial in `q1..qn`.
    pub monomial: Monomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    /// The `(Q, P)` monomial whose coefficient the row matches.
    pub monomial: Monomial,
    pub label: String,
    pub coeffs: SparseRow,
    pub rhs: Rational,
}

/// Exact coefficient-matching system `A c = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub case: CaseId,
    pub a: Rational,
    pub unknowns: Vec<Unknown>,
    pub rows: Vec<Row>,
}

impl LinearSystem {
    pub fn rank(&self) -> usize {
        let rows: Vec<SparseRow> = self.rows.iter().map(|r| r.coeffs.clone()).collect();
        rank_of(&rows, self.unknowns.len())
    }

    pub fn augmented_rank(&self) -> usize {
        let n = self.unknowns.len();
        let rows: Vec<SparseRow> = self
            .rows
            .iter()
            .map(|r| {
                let mut c = r.coeffs.clone();
                if !r.rhs.is_zero() {
                    c.insert(n, r.rhs.clone());
                }
                c
            })
            .collect();
        rank_of(&rows, n + 1)
    }

    pub fn is_solvable(&self) -> bool {
        self.rank() == self.augmented_rank()
    }

    pub fn solution(&self) -> LinearSolution {
        let rows: Vec<SparseRow> = self.rows.iter().map(|r| r.coeffs.clone()).collect();
        let rhs: Vec<Rational> = self.rows.iter().map(|r| r.rhs.clone()).collect();
        solve(&rows, &rhs, self.unknowns.len())
    }

    pub fn unknown_index(&self, name: &str) -> Option<usize> {
        self.unknowns.iter().position(|u| u.name == name)
    }

    pub fn row(&self, label: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Drops every unknown not listed (they are set to zero) and every row
    /// that becomes `0 = 0`.
    pub fn restrict(&self, keep: &[&str]) -> LinearSystem {
        let kept: Vec<usize> = (0..self.unknowns.len()).filter(|&i| keep.contains(&self.unknowns[i].name.as_str())).collect();
        let remap: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let rows = self
            .rows
            .iter()
            .filter_map(|r| {
                let coeffs: SparseRow =
                    r.coeffs.iter().filter_map(|(c, v)| remap.get(c).map(|&nc| (nc, v.clone()))).collect();
                if coeffs.is_empty() && r.rhs.is_zero() {
                    None
                } else {
                    Some(Row { coeffs, ..r.clone() })
                }
            })
            .collect();
        LinearSystem {
            case: self.case,
            a: self.a.clone(),
            unknowns: kept.iter().map(|&i| self.unknowns[i].clone()).collect(),
            rows,
        }
    }

    /// Row as the linear form `sum coeff * unknown - rhs`, in a space named by
    /// the unknowns.
    pub fn row_form(&self, row: &Row) -> Poly {
        let names: Vec<&str> = self.unknowns.iter().map(|u| u.name.as_str()).collect();
        let sp = VarSpace::named(&names);
        let mut acc = Poly::constant(&sp, -row.rhs.clone());
        for (c, v) in &row.coeffs {
            acc = &acc + &Poly::var(&sp, *c).scale(v);
        }
        acc
    }

    /// Human-readable equation `lhs = rhs`.
    pub fn row_equation(&self, row: &Row) -> String {
        let mut lhs = self.row_form(row);
        lhs = &lhs + &Poly::constant(lhs.space(), row.rhs.clone());
        format!("{}: {} = {}", row.label, lhs, fmt_rat(&row.rhs))
    }

    /// Exact augmented matrix as CSV: header of unknown names, then one row
    /// per monomial.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("monomial");
        for u in &self.unknowns {
            out.push(',');
            out.push_str(&u.name);
        }
        out.push_str(",rhs\n");
        for r in &self.rows {
            out.push_str(&r.label);
            for i in 0..self.unknowns.len() {
                out.push(',');
                out.push_str(&r.coeffs.get(&i).map(fmt_rat).unwrap_or_else(|| "0".into()));
            }
            out.push(',');
            out.push_str(&fmt_rat(&r.rhs));
            out.push('\n');
        }
        out
    }

    /// Rows indexed by monomials in `P` alone involve only `h_0` and slots
    /// whose multiplier has no `Q` dependence.
    pub fn pure_p_rows_decoupled(&self, case: &TangencyCase) -> bool {
        let n = case.n;
        let s = case.map_at(&self.a);
        let pure_slots: BTreeSet<usize> = (1..=n).filter(|&i| s.p(i - 1).independent_of(&(0..n).collect::<Vec<_>>())).collect();
        self.rows.iter().filter(|r| (0..n).all(|i| r.monomial.exp(i) == 0)).all(|r| {
            r.coeffs.keys().all(|&c| {
                let slot = self.unknowns[c].slot;
                slot == 0 || pure_slots.contains(&slot)
            })
        })
    }
}

fn assemble(case: &TangencyCase, a: &Rational, unknowns: Vec<Unknown>, target: &Poly) -> Result<LinearSystem, OrbitError> {
    let s = case.map_at(a);
    let sp = s.space();
    let columns: Vec<Poly> = unknowns.iter().map(|u| case.column(&s, u)).collect::<Result<_, _>>()?;
    let mut rows: BTreeMap<Monomial, (SparseRow, Rational)> = BTreeMap::new();
    for (j, col) in columns.iter().enumerate() {
        for (m, c) in col.terms() {
            rows.entry(m.clone()).or_insert_with(|| (SparseRow::new(), Rational::zero())).0.insert(j, c.clone());
        }
    }
    for (m, c) in target.terms() {
        rows.entry(m.clone()).or_insert_with(|| (SparseRow::new(), Rational::zero())).1 = c.clone();
    }
    let mut rows: Vec<Row> = rows
        .into_iter()
        .map(|(m, (coeffs, rhs))| Row { label: m.to_string_in(&sp), monomial: m, coeffs, rhs })
        .collect();
    rows.sort_by(|x, y| x.monomial.degree().cmp(&y.monomial.degree()).then_with(|| y.monomial.cmp(&x.monomial)));
    Ok(LinearSystem { case: case.id, a: a.clone(), unknowns, rows })
}

/// Coefficient matching of `f o S_a` mod the case's ideal.
pub fn build_tangency_system(case: &TangencyCase, a: &Rational) -> Result<LinearSystem, OrbitError> {
    modal_direction(case, a)?;
    let s = case.map_at(a);
    let target = case.reduce(&s.pull_back(&case.hamiltonian)?);
    assemble(case, a, case.ansatz(), &target)
}

/// Same system with a caller-supplied target (over `VarSpace::phase(n)`).
pub fn build_system_for_target(case: &TangencyCase, a: &Rational, target: &Poly) -> Result<LinearSystem, OrbitError> {
    case.check_domain(a)?;
    let target = case.reduce(&target.embed(&case.space())?);
    assemble(case, a, case.ansatz(), &target)
}

/// Whether `dS_a/da` is tangent to the orbit through `S_a`.
pub fn is_tangent(case: &TangencyCase, a: &Rational) -> Result<bool, OrbitError> {
    Ok(build_tangency_system(case, a)?.is_solvable())
}

/// Tangency verdict for the target `H o S_a`, `H = sum h_i p_i + h_0`.
pub fn is_tangent_control(case: &TangencyCase, a: &Rational, h: &[Poly]) -> Result<bool, OrbitError> {
    let target = case.representable_target(a, h)?;
    Ok(build_system_for_target(case, a, &target)?.is_solvable())
}

/// Parses control assignments such as `h0=q1^2,h2=q1*q3`.
pub fn parse_control(case: &TangencyCase, text: &str) -> Result<Vec<Poly>, crate::Error> {
    let qs = VarSpace::corner(0, 0, case.n);
    let mut h = vec![Poly::zero(&qs); case.n + 1];
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, expr) = part
            .split_once('=')
            .ok_or_else(|| OrbitError::UnknownUnknown(part.trim().to_string()))?;
        let slot: usize = name
            .trim()
            .strip_prefix('h')
            .and_then(|s| s.parse().ok())
            .filter(|&s| s <= case.n)
            .ok_or_else(|| OrbitError::UnknownUnknown(name.trim().to_string()))?;
        h[slot] = parse_expression(expr, &qs)?;
    }
    Ok(h)
}

/// One solution branch: `assigned` unknowns as expressions in the `free` ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub assigned: Vec<(String, Poly)>,
    pub free: Vec<String>,
    /// Unknowns assumed nonzero on this branch.
    pub nonzero: Vec<String>,
}

impl Branch {
    pub fn value(&self, name: &str) -> Option<&Poly> {
        self.assigned.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.assigned.iter().map(|(n, p)| format!("{n} = {p}")).collect();
        parts.extend(self.free.iter().map(|n| format!("{n} free")));
        f.write_str(&parts.join(", "))
    }
}

/// Union of affine branches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSet {
    pub unknowns: Vec<String>,
    pub equations: Vec<Poly>,
    pub branches: Vec<Branch>,
}

impl fmt::Display for SolutionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.branches.is_empty() {
            return f.write_str("no solution");
        }
        let parts: Vec<String> = self.branches.iter().map(|b| b.to_string()).collect();
        f.write_str(&parts.join("  or  "))
    }
}

/// Equations the case singles out for a closer look, over named unknowns.
///
/// For `B223pp` these are the five printed relations, which contain products
/// of unknowns; for the others the rows are taken from the built system.
pub fn designated_equations(case: &TangencyCase, a: &Rational) -> Result<(VarSpace, Vec<(String, Poly)>), OrbitError> {
    match case.id {
        CaseId::B223pp => {
            let sp = VarSpace::named(&["b", "c", "d", "e", "f", "g"]);
            let v = |s: &str| Poly::var_named(&sp, s).expect("named unknown");
            let k = |c: i64| Poly::constant(&sp, Rational::from_integer(c.into()));
            let (b, c, d, e, f, g) = (v("b"), v("c"), v("d"), v("e"), v("f"), v("g"));
            let first = &(&k(-2) * &b) - &(&k(2) * &c);
            let eqs = vec![
                ("Q1^2*Q2".to_string(), first.clone()),
                ("Q1*Q2^2".to_string(), &(&k(-8) * &first) + &(&(&k(2) * &e) * &(&k(-2) - &(&k(2) * &f)))),
                ("Q2^2*P1".to_string(), &(&k(4) * &b) - &(&k(2) * &e)),
                ("Q1*Q2*P3".to_string(), d.clone()),
                ("Q2^2*P3".to_string(), &(&k(4) * &d) - &(&(&k(2) * &e) * &g)),
            ];
            Ok((sp, eqs))
        }
        CaseId::C32pp => {
            // The printed ansatz h1 = b q1, h2 = c q1 + d q2 + e q3,
            // h3 = f q1 + g q2 + h q3, h0 = q1 (i q1 + j q2 + h q3) reuses `h`;
            // with that identification the M^3 rows are contradictory.
            let sys = build_tangency_system(&case.printed_degree(), a)?;
            let sub = sys.restrict(&["b", "c", "d", "e", "f", "g", "h", "i", "j", "k"]);
            let sp = VarSpace::named(&["b", "c", "d", "e", "f", "g", "h", "i", "j"]);
            let names: Vec<&str> = sub.unknowns.iter().map(|u| u.name.as_str()).collect();
            let wide = VarSpace::named(&names);
            let k = wide.index_of("k").expect("alias present");
            let h = Poly::var(&wide, wide.index_of("h").expect("alias present"));
            let eqs = sub
                .rows
                .iter()
                .map(|r| {
                    let p = substitute(&sub.row_form(r).embed(&wide)?, k, &h)?;
                    Ok((r.label.clone(), p.embed(&sp)?))
                })
                .collect::<Result<_, OrbitError>>()?;
            Ok((sp, eqs))
        }
        _ => {
            let sys = build_tangency_system(case, a)?;
            let (keep, labels): (Vec<&str>, Vec<&str>) = match case.id {
                CaseId::B22a => (vec!["b", "c", "d", "e"], vec!["Q1^2", "Q1*P2", "Q2*P1"]),
                _ => (vec![], vec![]),
            };
            let sub = sys.restrict(&keep);
            let names: Vec<&str> = sub.unknowns.iter().map(|u| u.name.as_str()).collect();
            let sp = VarSpace::named(&names);
            let eqs = labels
                .iter()
                .filter_map(|l| sub.row(l).map(|r| (l.to_string(), sub.row_form(r))))
                .map(|(l, p)| (l, p.embed(&sp).expect("row uses kept unknowns")))
                .collect();
            Ok((sp, eqs))
        }
    }
}

/// Solves the designated equations that involve only `unknowns`.
pub fn solve_subsystem(case: &TangencyCase, a: &Rational, unknowns: &[&str]) -> Result<SolutionSet, OrbitError> {
    let (sp, eqs) = designated_equations(case, a)?;
    for u in unknowns {
        if sp.index_of(u).is_none() {
            return Err(OrbitError::UnknownUnknown(u.to_string()));
        }
    }
    let outside: Vec<usize> = (0..sp.len()).filter(|&i| !unknowns.contains(&sp.name(i))).collect();
    let chosen: Vec<Poly> = eqs.into_iter().map(|(_, p)| p).filter(|p| p.independent_of(&outside)).collect();
    let sub = VarSpace::named(unknowns);
    let chosen: Vec<Poly> = chosen.iter().map(|p| p.embed(&sub)).collect::<Result<_, _>>()?;
    let branches = solve_branches(&sub, &chosen)?;
    Ok(SolutionSet { unknowns: unknowns.iter().map(|s| s.to_string()).collect(), equations: chosen, branches })
}

/// Branch enumeration for systems whose nonlinear equations factor off a
/// single unknown: linear equations are eliminated, and `u * g = 0` splits
/// into `u = 0` and `g = 0, u != 0`.
pub fn solve_branches(space: &VarSpace, eqs: &[Poly]) -> Result<Vec<Branch>, OrbitError> {
    let mut out = Vec::new();
    split(space, eqs.to_vec(), Vec::new(), BTreeSet::new(), &mut out, 0)?;
    out.sort_by(|a, b| b.free.len().cmp(&a.free.len()).then_with(|| a.to_string().cmp(&b.to_string())));
    out.dedup();
    Ok(out)
}

fn substitute(p: &Poly, var: usize, value: &Poly) -> Result<Poly, OrbitError> {
    let mut map = BTreeMap::new();
    map.insert(var, value.clone());
    Ok(p.compose(&map, p.space())?)
}

fn split(
    space: &VarSpace,
    mut eqs: Vec<Poly>,
    mut assigned: Vec<(usize, Poly)>,
    nonzero: BTreeSet<usize>,
    out: &mut Vec<Branch>,
    depth: usize,
) -> Result<(), OrbitError> {
    if depth > 64 {
        return Err(OrbitError::NotFinitelyBranched);
    }
    loop {
        eqs.retain(|e| !e.is_zero());
        if eqs.iter().any(|e| e.degree() == Some(0)) {
            return Ok(());
        }
        // Assumed-nonzero unknowns that became identically zero kill the branch.
        for &u in &nonzero {
            let mut val = Poly::var(space, u);
            for (v, p) in assigned.iter().rev() {
                val = substitute(&val, *v, p)?;
            }
            if val.is_zero() {
                return Ok(());
            }
        }
        let Some(pos) = eqs.iter().position(|e| e.degree() == Some(1)) else { break };
        let e = eqs.remove(pos);
        let var = (0..space.len()).find(|&v| !e.coeff(&Monomial::var(space.len(), v)).is_zero()).expect("linear");
        let c = e.coeff(&Monomial::var(space.len(), var));
        let rest = &e - &Poly::var(space, var).scale(&c);
        let value = rest.scale(&(-Rational::one() / c));
        eqs = eqs.iter().map(|q| substitute(q, var, &value)).collect::<Result<_, _>>()?;
        assigned = assigned.into_iter().map(|(v, p)| substitute(&p, var, &value).map(|p| (v, p))).collect::<Result<_, _>>()?;
        assigned.push((var, value));
    }
    if eqs.is_empty() {
        let names: Vec<usize> = (0..space.len()).collect();
        let assigned_vars: BTreeSet<usize> = assigned.iter().map(|(v, _)| *v).collect();
        let mut assigned_sorted = assigned.clone();
        assigned_sorted.sort_by_key(|(v, _)| *v);
        out.push(Branch {
            assigned: assigned_sorted.into_iter().map(|(v, p)| (space.name(v).to_string(), p)).collect(),
            free: names.iter().filter(|v| !assigned_vars.contains(v)).map(|&v| space.name(v).to_string()).collect(),
            nonzero: nonzero.iter().map(|&v| space.name(v).to_string()).collect(),
        });
        return Ok(());
    }
    // Factor a common unknown off some equation, preferring assumed-nonzero ones.
    let mut pick = None;
    for (i, e) in eqs.iter().enumerate() {
        let common: Vec<usize> = (0..space.len()).filter(|&v| e.terms().all(|(m, _)| m.exp(v) > 0)).collect();
        if let Some(&v) = common.iter().find(|v| nonzero.contains(v)).or(common.first()) {
            pick = Some((i, v));
            if nonzero.contains(&v) {
                break;
            }
        }
    }
    let Some((i, v)) = pick else {
        return Err(OrbitError::NotFinitelyBranched);
    };
    let e = eqs[i].clone();
    // Branch u = 0.
    if !nonzero.contains(&v) {
        let zero = Poly::zero(space);
        let sub_eqs: Vec<Poly> = eqs.iter().map(|q| substitute(q, v, &zero)).collect::<Result<_, _>>()?;
        let sub_assigned: Vec<(usize, Poly)> =
            assigned.iter().map(|(w, p)| substitute(p, v, &zero).map(|p| (*w, p))).collect::<Result<_, _>>()?;
        let mut sub_assigned = sub_assigned;
        sub_assigned.push((v, zero));
        split(space, sub_eqs, sub_assigned, nonzero.clone(), out, depth + 1)?;
    }
    // Branch u != 0: divide the factor out.
    let reduced = Poly::from_terms(
        space,
        e.terms().map(|(m, c)| {
            let mut ex = m.exponents().to_vec();
            ex[v] -= 1;
            (Monomial::from_exponents(ex), c.clone())
        }),
    );
    let mut sub_eqs = eqs;
    sub_eqs[i] = reduced;
    let mut nz = nonzero;
    nz.insert(v);
    split(space, sub_eqs, assigned, nz, out, depth + 1)
}

/// Full report for one case at one modulus value.
#[derive(Clone, Debug)]
pub struct TangencyReport {
    pub case: CaseId,
    pub a: Rational,
    pub map: SymplecticJet,
    pub direction: Vec<Poly>,
    pub target: Poly,
    pub system: LinearSystem,
    pub rank: usize,
    pub augmented_rank: usize,
    pub tangent: bool,
    pub designated: Option<SolutionSet>,
}

pub fn tangency_report(case: &TangencyCase, a: &Rational) -> Result<TangencyReport, OrbitError> {
    let direction = modal_direction(case, a)?;
    let map = case.map_at(a);
    let target = case.reduce(&map.pull_back(&case.hamiltonian)?);
    let system = build_tangency_system(case, a)?;
    let (sp, _) = designated_equations(case, a)?;
    let names: Vec<&str> = sp.names().iter().map(String::as_str).collect();
    let designated = if names.is_empty() { None } else { Some(solve_subsystem(case, a, &names)?) };
    Ok(TangencyReport {
        case: case.id,
        a: a.clone(),
        map,
        direction,
        target,
        rank: system.rank(),
        augmented_rank: system.augmented_rank(),
        tangent: system.rank() == system.augmented_rank(),
        system,
        designated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    fn strings(ps: &[Poly]) -> Vec<String> {
        ps.iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn cases_at_one() {
        let s = catalog_case(CaseId::B23pp).map_at(&int(1));
        assert_eq!(strings(&s.components[..3]), ["-2*Q1 - Q2 - P1", "-3*Q2^2 + 2*Q2*P3 - Q1 - P2", "-P3"]);
        let s = catalog_case(CaseId::B22a).map_at(&int(1));
        assert_eq!(strings(&s.components), ["-2*Q1 - Q2 - P1", "-Q1 - 2*Q2 - P2", "Q1", "Q2"]);
        assert_eq!(catalog_case(CaseId::C32pp).hamiltonian.to_string(), "-p3^2");
        assert!("b22A".parse::<CaseId>().is_ok());
        assert!("B99".parse::<CaseId>().is_err());
    }

    #[test]
    fn symplectic_examples() {
        assert!(symplectic_check(&catalog_case(CaseId::B22a).map_at(&int(1))));
        assert!(symplectic_check(&SymplecticJet::identity(2)));
        let sp = VarSpace::phase(2);
        let v = |i| Poly::var(&sp, i);
        let doubled = SymplecticJet::new(2, vec![&v(0) + &v(0), v(1), v(2), v(3)], int(0));
        assert!(!symplectic_check(&doubled));
        let shear = SymplecticJet::new(2, vec![&v(0) + &v(2), v(1), v(2), v(3)], int(0));
        assert!(symplectic_check(&shear));
    }

    #[test]
    fn modal_directions() {
        let d = modal_direction(&catalog_case(CaseId::B23pp), &int(1)).unwrap();
        assert_eq!(strings(&d), ["0", "-3*Q2^2", "0", "0", "0", "0"]);
        let d = modal_direction(&catalog_case(CaseId::B22a), &int(1)).unwrap();
        assert_eq!(strings(&d), ["0", "-2*Q2", "0", "0"]);
        let d = modal_direction(&catalog_case(CaseId::C32pp), &int(1)).unwrap();
        assert_eq!(strings(&d), ["0", "0", "-2*Q2", "0", "0", "0"]);
        assert!(matches!(
            modal_direction(&catalog_case(CaseId::B22a), &rat(1, 5)),
            Err(OrbitError::OutOfDomain(_))
        ));
    }

    #[test]
    fn never_tangent() {
        for id in CaseId::ALL {
            let case = catalog_case(id);
            for a in [rat(1, 2), int(1), int(2)] {
                if case.in_domain(&a) {
                    assert!(!is_tangent(&case, &a).unwrap(), "{id} at {a}");
                }
            }
        }
    }

    #[test]
    fn b22a_rows() {
        let case = catalog_case(CaseId::B22a);
        let sys = build_tangency_system(&case, &int(1)).unwrap().restrict(&["b", "c", "d", "e"]);
        let eq = |l: &str| sys.row_equation(sys.row(l).unwrap());
        assert_eq!(eq("Q1^2"), "Q1^2: -2*b - c = 0");
        assert_eq!(eq("Q1*Q2"), "Q1*Q2: -b - 2*c - 2*d - e = 0");
        assert_eq!(eq("Q1*P2"), "Q1*P2: -c = 0");
        assert_eq!(eq("Q2*P1"), "Q2*P1: -d = 0");
        assert_eq!(eq("Q2^2"), "Q2^2: -d - 2*e = -1");
        let sol = solve_subsystem(&case, &int(1), &["b", "c", "d", "e"]).unwrap();
        assert_eq!(sol.to_string(), "b = 0, c = 0, d = 0, e free");
        let sol = solve_subsystem(&case, &int(1), &[]).unwrap();
        assert_eq!(sol.branches.len(), 1);
        assert!(sol.branches[0].assigned.is_empty());
    }

    #[test]
    fn b223_branches() {
        let case = catalog_case(CaseId::B223pp);
        let sol = solve_subsystem(&case, &int(1), &["b", "c", "d", "e", "f", "g"]).unwrap();
        assert_eq!(sol.branches.len(), 2);
        assert_eq!(sol.branches[0].to_string(), "b = 0, c = 0, d = 0, e = 0, f free, g free");
        assert_eq!(sol.branches[1].to_string(), "b = 1/2*e, c = -1/2*e, d = 0, f = -1, g = 0, e free");
        assert!(matches!(solve_subsystem(&case, &int(1), &["z"]), Err(OrbitError::UnknownUnknown(_))));
    }

    #[test]
    fn decoupling_and_control() {
        for id in CaseId::ALL {
            let case = catalog_case(id);
            let sys = build_tangency_system(&case, &int(1)).unwrap();
            assert!(sys.pure_p_rows_decoupled(&case), "{id}");
        }
        let case = catalog_case(CaseId::B23pp);
        let h = parse_control(&case, "h0=q1^2").unwrap();
        assert!(is_tangent_control(&case, &int(1), &h).unwrap());
    }

    #[test]
    fn c32_printed_degree() {
        let case = catalog_case(CaseId::C32pp);
        let printed = case.printed_degree();
        assert!(build_tangency_system(&printed, &int(1)).unwrap().is_solvable());
        // Explicit representation of -a Q2^2 at M^3, here with a = 1.
        let h = parse_control(&printed, "h1=-1/2*q1,h2=1/2*q2-1/2*q3,h0=-1/2*q1*q3").unwrap();
        let a = int(1);
        let target = printed.reduce(&printed.map_at(&a).pull_back(&printed.hamiltonian).unwrap());
        assert_eq!(printed.representable_target(&a, &h).unwrap(), target);
        let sol = solve_subsystem(&case, &int(1), &["b", "c", "d", "e", "f", "g", "h", "i", "j"]).unwrap();
        assert!(sol.branches.is_empty());
    }
}
