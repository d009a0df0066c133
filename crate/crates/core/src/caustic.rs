//! Stratified caustics of generating families.
//!
//! A stratum `sigma` (a subset of the corner indices) pins `x_sigma = 0` and
//! asks the remaining corner variables and the fibre variables to be
//! critical. Its fold caustic is where the Hessian in those witnesses
//! degenerates; quasi-caustics are images of meetings of two strata. Since
//! every supported family is affine in the parameters, each witness sample
//! fixes an affine set of parameters, so the sweep is linear algebra plus a
//! one-dimensional bisection for the fold condition.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CausticError;
use crate::eval::{solve_dense, CompiledPoly};
use crate::germ::GeneratingFamily;
use crate::poly::{Poly, Rational, VarSpace};

/// Default residual tolerance for emitted witnesses.
pub const DEFAULT_EPS: f64 = 1e-9;

/// A set of corner indices, stored 0-based and sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stratum(Vec<usize>);

impl Stratum {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Stratum(indices)
    }

    pub fn empty() -> Self {
        Stratum(Vec::new())
    }

    pub fn full(r: usize) -> Self {
        Stratum((0..r).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &Stratum) -> bool {
        self.0.iter().all(|i| other.contains(*i))
    }

    pub fn union(&self, other: &Stratum) -> Stratum {
        Stratum::new(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &Stratum) -> Stratum {
        Stratum(self.0.iter().copied().filter(|i| other.contains(*i)).collect())
    }

    /// All subsets of `{0..r}`, by size and then lexicographically.
    pub fn all(r: usize) -> Vec<Stratum> {
        let mut out: Vec<Stratum> = (0u32..(1 << r))
            .map(|mask| Stratum((0..r).filter(|i| mask & (1 << i) != 0).collect()))
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }

    /// Parses `{}`, `0`, `∅`, `1`, `{1,2}` or `1,2` (1-based).
    pub fn parse(s: &str) -> Option<Stratum> {
        let t = s.trim().trim_start_matches('{').trim_end_matches('}').trim();
        if t.is_empty() || t == "∅" || t == "0" || t == "e" {
            return Some(Stratum::empty());
        }
        let mut v = Vec::new();
        for part in t.split(',') {
            let i: usize = part.trim().parse().ok()?;
            if i == 0 {
                return None;
            }
            v.push(i - 1);
        }
        Some(Stratum::new(v))
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.len() {
            0 => f.write_str("∅"),
            1 => write!(f, "{}", self.0[0] + 1),
            _ => {
                let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    /// Fold caustic of one stratum.
    Caustic(Stratum),
    /// Image of the meeting of two strata.
    Quasi(Stratum, Stratum),
}

impl ComponentKind {
    pub fn label(&self) -> String {
        match self {
            ComponentKind::Caustic(s) => format!("C_{s}"),
            ComponentKind::Quasi(s, t) => format!("Q_{{{s},{t}}}"),
        }
    }

    pub fn is_quasi(&self) -> bool {
        matches!(self, ComponentKind::Quasi(..))
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Polynomial conditions cutting out one component, over the family's full
/// variable space `(x, y, q)`.
#[derive(Clone, Debug)]
pub struct DefiningSystem {
    pub kind: ComponentKind,
    pub space: VarSpace,
    /// Corner variables pinned to zero.
    pub zero_vars: Vec<usize>,
    /// Witness unknowns: free corner variables, then fibre variables.
    pub free_vars: Vec<usize>,
    /// Criticality equations, affine in the parameters.
    pub critical: Vec<Poly>,
    /// Hessian determinant in the witness unknowns (fold caustics only).
    pub hessian_det: Option<Poly>,
    /// Free corner variables, constrained to be nonnegative.
    pub nonneg: Vec<usize>,
    /// Whether `nonneg` is strict.
    pub strict: bool,
    /// Extra conditions `p >= 0` (half-line variant of quasi-caustics).
    pub sign_conditions: Vec<Poly>,
}

impl DefiningSystem {
    /// All equations `= 0`, including the pinned coordinates.
    pub fn equations(&self) -> Vec<Poly> {
        let mut out: Vec<Poly> = self.zero_vars.iter().map(|&i| Poly::var(&self.space, i)).collect();
        out.extend(self.critical.iter().cloned());
        out.extend(self.hessian_det.iter().cloned());
        out
    }
}

fn check_stratum(s: &Stratum, r: usize) -> Result<(), CausticError> {
    if s.indices().iter().any(|&i| i >= r) {
        return Err(CausticError::BadStratum);
    }
    Ok(())
}

fn determinant(m: &[Vec<Poly>]) -> Poly {
    match m.len() {
        0 => unreachable!("empty determinant"),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Poly::zero(m[0][0].space());
            for (c, entry) in m[0].iter().enumerate() {
                if entry.is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, p)| p.clone()).collect())
                    .collect();
                let term = entry * &determinant(&minor);
                acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Equations of the fold caustic of stratum `sigma`: `x_sigma = 0` and
/// criticality in the other corner variables and all fibre variables.
pub fn stratum_equations(family: &GeneratingFamily, sigma: &Stratum) -> Result<DefiningSystem, CausticError> {
    let (r, k, _) = family.rkn();
    check_stratum(sigma, r)?;
    let f = family.poly();
    let free_corner: Vec<usize> = (0..r).filter(|i| !sigma.contains(*i)).collect();
    let free: Vec<usize> = free_corner.iter().copied().chain(r..r + k).collect();
    let critical: Vec<Poly> = free.iter().map(|&v| f.differentiate(v)).collect();
    let hessian_det = if free.is_empty() {
        None
    } else {
        let h: Vec<Vec<Poly>> = critical.iter().map(|g| free.iter().map(|&v| g.differentiate(v)).collect()).collect();
        Some(determinant(&h))
    };
    Ok(DefiningSystem {
        kind: ComponentKind::Caustic(sigma.clone()),
        space: family.space().clone(),
        zero_vars: sigma.indices().to_vec(),
        free_vars: free,
        critical,
        hessian_det,
        nonneg: free_corner,
        strict: true,
        sign_conditions: Vec::new(),
    })
}

/// Equations of the quasi-caustic of `sigma` and `tau`: `x` vanishes on
/// their union, criticality holds off their intersection.
pub fn quasi_equations(
    family: &GeneratingFamily,
    sigma: &Stratum,
    tau: &Stratum,
    half_lines: bool,
) -> Result<DefiningSystem, CausticError> {
    let (r, k, _) = family.rkn();
    check_stratum(sigma, r)?;
    check_stratum(tau, r)?;
    if sigma == tau {
        return Err(CausticError::SameStrata);
    }
    let f = family.poly();
    let zero = sigma.union(tau);
    let common = sigma.intersection(tau);
    let free_corner: Vec<usize> = (0..r).filter(|i| !zero.contains(*i)).collect();
    let free: Vec<usize> = free_corner.iter().copied().chain(r..r + k).collect();
    let critical: Vec<Poly> = (0..r)
        .filter(|i| !common.contains(*i))
        .chain(r..r + k)
        .map(|v| f.differentiate(v))
        .collect();
    let sign_conditions = if half_lines {
        common.indices().iter().map(|&j| f.differentiate(j)).collect()
    } else {
        Vec::new()
    };
    Ok(DefiningSystem {
        kind: ComponentKind::Quasi(sigma.clone(), tau.clone()),
        space: family.space().clone(),
        zero_vars: zero.indices().to_vec(),
        free_vars: free,
        critical,
        hessian_det: None,
        nonneg: free_corner,
        strict: false,
        sign_conditions,
    })
}

/// Axis-aligned box of parameter values.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    ranges: Vec<(f64, f64)>,
}

impl Window {
    pub fn new(ranges: Vec<(f64, f64)>) -> Result<Self, CausticError> {
        if ranges.is_empty() {
            return Err(CausticError::InvalidWindow("no ranges".into()));
        }
        for &(lo, hi) in &ranges {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(CausticError::InvalidWindow("bounds must be finite".into()));
            }
            if lo > hi {
                return Err(CausticError::InvalidWindow(format!("lower bound {lo} exceeds upper bound {hi}")));
            }
        }
        Ok(Self { ranges })
    }

    /// The same range on every axis.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self, CausticError> {
        Self::new(vec![(lo, hi); n])
    }

    /// Parses `lo:hi,lo:hi,...`.
    pub fn parse(s: &str) -> Result<Self, CausticError> {
        let mut ranges = Vec::new();
        for part in s.split(',') {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| CausticError::InvalidWindow(format!("`{part}` is not of the form lo:hi")))?;
            let p = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| CausticError::InvalidWindow(format!("`{t}` is not a number")))
            };
            ranges.push((p(lo)?, p(hi)?));
        }
        Self::new(ranges)
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    pub fn is_degenerate(&self) -> bool {
        self.ranges.iter().any(|(lo, hi)| hi <= lo)
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        self.ranges.iter().zip(q).all(|(&(lo, hi), &v)| {
            let slack = 1e-9 * (hi - lo).max(1.0);
            v >= lo - slack && v <= hi + slack
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.ranges.iter().map(|(lo, hi)| lo.abs().max(hi.abs())).fold(0.0, f64::max)
    }

    /// Smallest grid spacing at the given resolution.
    pub fn spacing(&self, resolution: usize) -> f64 {
        self.ranges.iter().map(|(lo, hi)| (hi - lo) / resolution as f64).fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ranges.iter().map(|(lo, hi)| format!("{lo}:{hi}")).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CausticOptions {
    /// Corner witnesses range over `[0, bound]`, fibre witnesses over
    /// `[-bound, bound]`. `None` picks `max(3, largest window bound)`.
    pub witness_bound: Option<f64>,
    /// Restrict quasi-caustics by `dF/dx_j >= 0` on the shared stratum.
    pub half_lines: bool,
    pub eps: f64,
}

impl Default for CausticOptions {
    fn default() -> Self {
        Self { witness_bound: None, half_lines: false, eps: DEFAULT_EPS }
    }
}

impl CausticOptions {
    pub fn bound_for(&self, window: &Window) -> f64 {
        self.witness_bound.unwrap_or_else(|| window.max_abs().max(3.0))
    }
}

/// One labelled piece of a caustic.
#[derive(Clone, Debug)]
pub struct Component {
    pub kind: ComponentKind,
    /// Number of parameters.
    pub ambient_dim: usize,
    /// Parameter points.
    pub points: Vec<Vec<f64>>,
    /// Witness `(x, y)` for each point.
    pub witnesses: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub segments: Vec<[usize; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

impl Component {
    fn empty(kind: ComponentKind, n: usize) -> Self {
        Self {
            kind,
            ambient_dim: n,
            points: Vec::new(),
            witnesses: Vec::new(),
            residuals: Vec::new(),
            segments: Vec::new(),
            triangles: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn label(&self) -> String {
        self.kind.label()
    }
}

#[derive(Clone, Debug)]
pub struct CausticGeometry {
    pub family: GeneratingFamily,
    pub window: Window,
    pub resolution: usize,
    pub options: CausticOptions,
    pub components: Vec<Component>,
}

impl CausticGeometry {
    pub fn component(&self, kind: &ComponentKind) -> Option<&Component> {
        self.components.iter().find(|c| &c.kind == kind)
    }

    pub fn max_residual(&self) -> f64 {
        self.components.iter().map(Component::max_residual).fold(0.0, f64::max)
    }

    pub fn point_count(&self) -> usize {
        self.components.iter().map(|c| c.points.len()).sum()
    }
}

fn validate(family: &GeneratingFamily, window: &Window, resolution: usize) -> Result<(), CausticError> {
    let n = family.rkn().2;
    if !(2..=3).contains(&n) {
        return Err(CausticError::UnsupportedDimension(n));
    }
    if window.dim() != n {
        return Err(CausticError::InvalidWindow(format!("window has {} ranges, family has {n} parameters", window.dim())));
    }
    if resolution < 2 {
        return Err(CausticError::InvalidResolution);
    }
    if !family.is_affine_in_parameters() {
        return Err(CausticError::NotAffine);
    }
    Ok(())
}

type Elimination = (Vec<Poly>, Vec<usize>, Vec<(usize, Poly)>);

/// Solves parameter-free criticality equations that are linear in a witness
/// variable with constant coefficient, and substitutes them away. Returns
/// the remaining equations, the remaining free witnesses and the solved ones.
fn eliminate_parameter_free(sys: &DefiningSystem, qoff: usize, n: usize) -> Result<Elimination, CausticError> {
    let qvars: Vec<usize> = (qoff..qoff + n).collect();
    let mut eqs = sys.critical.clone();
    let mut free = sys.free_vars.clone();
    let mut solved: Vec<(usize, Poly)> = Vec::new();
    let degenerate = |_| CausticError::Degenerate(sys.kind.label());
    loop {
        let found = eqs.iter().enumerate().find_map(|(i, e)| {
            if !e.independent_of(&qvars) {
                return None;
            }
            free.iter().copied().find_map(|w| {
                let c = e.differentiate(w);
                (e.degree_in(w) == 1 && c.degree() == Some(0)).then(|| (i, w, c.constant_term()))
            })
        });
        let Some((i, w, c)) = found else { break };
        let e = eqs.remove(i);
        let rest = &e - &Poly::var(e.space(), w).scale(&c);
        let value = rest.scale(&(-Rational::one() / c));
        let mut map = BTreeMap::new();
        map.insert(w, value.clone());
        eqs = eqs.iter().map(|q| q.compose(&map, q.space())).collect::<Result<_, _>>().map_err(degenerate)?;
        solved = solved
            .into_iter()
            .map(|(v, p)| p.compose(&map, p.space()).map(|p| (v, p)))
            .collect::<Result<_, _>>()
            .map_err(degenerate)?;
        solved.push((w, value));
        free.retain(|&v| v != w);
    }
    Ok((eqs, free, solved))
}

struct Axis {
    var: usize,
    lo: f64,
    hi: f64,
}

/// Parametrization of a defining system by witnesses and a subset of the
/// parameters; the remaining parameters are solved for.
struct Sweep {
    nvars: usize,
    qoff: usize,
    zero_vars: Vec<usize>,
    /// Witness variables fixed by parameter-free equations, as functions of
    /// the swept witnesses.
    eliminated: Vec<(usize, CompiledPoly)>,
    axes: Vec<Axis>,
    /// `coeffs[e][j]` multiplies `q_j` in equation `e`.
    coeffs: Vec<Vec<CompiledPoly>>,
    constants: Vec<CompiledPoly>,
    rest: Vec<usize>,
    det: Option<CompiledPoly>,
    critical: Vec<CompiledPoly>,
    nonneg: Vec<usize>,
    strict: bool,
    signs: Vec<CompiledPoly>,
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, m, &mut Vec::new(), &mut out);
    out
}

impl Sweep {
    /// `None` when the system has more equations than parameters.
    fn new(
        family: &GeneratingFamily,
        sys: &DefiningSystem,
        window: &Window,
        bound: f64,
    ) -> Result<Option<Sweep>, CausticError> {
        let (r, k, n) = family.rkn();
        let qoff = r + k;
        let (eqs, free, eliminated) = eliminate_parameter_free(sys, qoff, n)?;
        let neq = eqs.len();
        if neq > n {
            return Ok(None);
        }
        let zero = Rational::zero();
        let mut coeffs = Vec::with_capacity(neq);
        let mut constants = Vec::with_capacity(neq);
        for e in &eqs {
            let mut at_zero = e.clone();
            for j in 0..n {
                at_zero = at_zero.substitute_value(qoff + j, &zero);
            }
            constants.push(CompiledPoly::new(&at_zero));
            coeffs.push((0..n).map(|j| CompiledPoly::new(&e.differentiate(qoff + j))).collect::<Vec<_>>());
        }
        let nvars = family.space().len();
        let samples: Vec<Vec<f64>> = (0..3)
            .map(|s| {
                let mut z = vec![0.0; nvars];
                for (c, &v) in free.iter().enumerate() {
                    z[v] = 0.61 + 0.37 * s as f64 + 0.29 * c as f64 + 0.013 * (v * v) as f64;
                }
                z
            })
            .collect();
        let m = n - neq;
        let mut chosen = None;
        for free_q in combinations(n, m) {
            let rest: Vec<usize> = (0..n).filter(|j| !free_q.contains(j)).collect();
            let ok = samples.iter().all(|z| {
                if rest.is_empty() {
                    return true;
                }
                let a: Vec<Vec<f64>> = coeffs.iter().map(|row| rest.iter().map(|&j| row[j].eval(z)).collect()).collect();
                solve_dense(a, vec![1.0; neq], 1e-8).is_some()
            });
            if ok {
                chosen = Some((free_q, rest));
                break;
            }
        }
        let Some((free_q, rest)) = chosen else {
            return Err(CausticError::Degenerate(sys.kind.label()));
        };
        let mut axes: Vec<Axis> = free
            .iter()
            .map(|&v| if v < r { Axis { var: v, lo: 0.0, hi: bound } } else { Axis { var: v, lo: -bound, hi: bound } })
            .collect();
        for &j in &free_q {
            let (lo, hi) = window.ranges()[j];
            axes.push(Axis { var: qoff + j, lo, hi });
        }
        Ok(Some(Sweep {
            nvars,
            qoff,
            zero_vars: sys.zero_vars.clone(),
            eliminated: eliminated.iter().map(|(w, p)| (*w, CompiledPoly::new(p))).collect(),
            axes,
            coeffs,
            constants,
            rest,
            det: sys.hessian_det.as_ref().map(CompiledPoly::new),
            critical: sys.critical.iter().map(CompiledPoly::new).collect(),
            nonneg: sys.nonneg.clone(),
            strict: sys.strict,
            signs: sys.sign_conditions.iter().map(CompiledPoly::new).collect(),
        }))
    }

    fn dim(&self) -> usize {
        self.axes.len()
    }

    fn param_at(&self, node: &[usize], res: usize) -> Vec<f64> {
        node.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.lo + (a.hi - a.lo) * i as f64 / res as f64)
            .collect()
    }

    /// Full variable vector for a parameter sample.
    fn point(&self, params: &[f64]) -> Option<Vec<f64>> {
        let mut z = vec![0.0; self.nvars];
        for &i in &self.zero_vars {
            z[i] = 0.0;
        }
        for (a, &p) in self.axes.iter().zip(params) {
            z[a.var] = p;
        }
        for (w, value) in &self.eliminated {
            z[*w] = value.eval(&z);
        }
        if self.rest.is_empty() {
            return Some(z);
        }
        let nq = self.coeffs.first().map_or(0, |r| r.len());
        let free_q: Vec<usize> = (0..nq).filter(|j| !self.rest.contains(j)).collect();
        let a: Vec<Vec<f64>> = self.coeffs.iter().map(|row| self.rest.iter().map(|&j| row[j].eval(&z)).collect()).collect();
        let b: Vec<f64> = self
            .coeffs
            .iter()
            .zip(&self.constants)
            .map(|(row, c)| -(c.eval(&z) + free_q.iter().map(|&j| row[j].eval(&z) * z[self.qoff + j]).sum::<f64>()))
            .collect();
        let sol = solve_dense(a, b, 1e-12)?;
        for (&j, v) in self.rest.iter().zip(sol) {
            z[self.qoff + j] = v;
        }
        Some(z)
    }

    fn fold_value(&self, params: &[f64]) -> f64 {
        match (self.point(params), &self.det) {
            (Some(z), Some(d)) => d.eval(&z),
            _ => f64::NAN,
        }
    }

    fn residual(&self, z: &[f64]) -> f64 {
        let mut r = self.critical.iter().map(|c| c.eval(z).abs()).fold(0.0, f64::max);
        if let Some(d) = &self.det {
            r = r.max(d.eval(z).abs());
        }
        r
    }

    fn admissible(&self, z: &[f64], window: &Window, eps: f64) -> bool {
        let corner_ok = self.nonneg.iter().all(|&i| if self.strict { z[i] > 0.0 } else { z[i] >= -1e-12 });
        corner_ok && window.contains(&z[self.qoff..]) && self.signs.iter().all(|s| s.eval(z) >= -eps)
    }
}

struct Vertex {
    q: Vec<f64>,
    witness: Vec<f64>,
    residual: f64,
}

impl Sweep {
    fn vertex(&self, params: &[f64], window: &Window, eps: f64) -> Option<Vertex> {
        let z = self.point(params)?;
        if !self.admissible(&z, window, eps) {
            return None;
        }
        let residual = self.residual(&z);
        Some(Vertex { q: z[self.qoff..].to_vec(), witness: z[..self.qoff].to_vec(), residual })
    }

    /// Bisects the fold condition along a grid edge.
    fn crossing(&self, pa: &[f64], pb: &[f64], ga: f64, window: &Window, eps: f64) -> Option<Vertex> {
        let at = |t: f64| -> Vec<f64> { pa.iter().zip(pb).map(|(a, b)| a + (b - a) * t).collect() };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let sa = ga > 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let g = self.fold_value(&at(mid));
            if !g.is_finite() {
                return None;
            }
            if g == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (g > 0.0) == sa {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Of the two bracketing ends, keep the one with the smaller residual.
        let cands = [lo, hi];
        cands
            .iter()
            .filter_map(|&t| self.vertex(&at(t), window, eps))
            .min_by(|a, b| a.residual.total_cmp(&b.residual))
    }
}

/// Assembles a component from per-edge (or per-node) vertices, merging
/// points closer than `tol`.
struct Builder {
    n: usize,
    tol: f64,
    comp: Component,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl Builder {
    fn new(kind: ComponentKind, n: usize, tol: f64) -> Self {
        Self { n, tol, comp: Component::empty(kind, n), cells: HashMap::new() }
    }

    fn key(&self, q: &[f64]) -> Vec<i64> {
        q.iter().map(|v| (v / self.tol).floor() as i64).collect()
    }

    fn add(&mut self, v: Vertex) -> usize {
        let key = self.key(&v.q);
        let mut neighbours = vec![key.clone()];
        for d in 0..self.n {
            let cur = neighbours.clone();
            for c in cur {
                for off in [-1i64, 1] {
                    let mut k = c.clone();
                    k[d] += off;
                    neighbours.push(k);
                }
            }
        }
        for k in &neighbours {
            if let Some(ids) = self.cells.get(k) {
                for &id in ids {
                    let d2: f64 = self.comp.points[id].iter().zip(&v.q).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2.sqrt() < self.tol {
                        return id;
                    }
                }
            }
        }
        let id = self.comp.points.len();
        self.comp.points.push(v.q);
        self.comp.witnesses.push(v.witness);
        self.comp.residuals.push(v.residual);
        self.cells.entry(key).or_default().push(id);
        id
    }

    fn segment(&mut self, a: usize, b: usize) {
        if a != b {
            self.comp.segments.push([a.min(b), a.max(b)]);
        }
    }

    fn triangle(&mut self, a: usize, b: usize, c: usize) {
        if a != b && b != c && a != c {
            self.comp.triangles.push([a, b, c]);
        }
    }

    fn finish(mut self) -> Component {
        self.comp.segments.sort_unstable();
        self.comp.segments.dedup();
        self.comp
    }
}

fn flat_index(node: &[usize], res: usize) -> usize {
    node.iter().rev().fold(0, |acc, &i| acc * (res + 1) + i)
}

fn unflatten(mut idx: usize, d: usize, res: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        out.push(idx % (res + 1));
        idx /= res + 1;
    }
    out
}

/// Kuhn triangulation of the unit cube into six tetrahedra (corner offsets).
const TETS: [[[usize; 3]; 4]; 6] = {
    const fn tet(p: [usize; 3]) -> [[usize; 3]; 4] {
        let mut out = [[0usize; 3]; 4];
        let mut cur = [0usize; 3];
        let mut i = 0;
        while i < 3 {
            cur[p[i]] = 1;
            out[i + 1] = cur;
            i += 1;
        }
        out
    }
    [tet([0, 1, 2]), tet([0, 2, 1]), tet([1, 0, 2]), tet([1, 2, 0]), tet([2, 0, 1]), tet([2, 1, 0])]
};

fn extract_fold(sweep: &Sweep, kind: ComponentKind, n: usize, window: &Window, res: usize, eps: f64) -> Component {
    let d = sweep.dim();
    let total = (res + 1).pow(d as u32);
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| sweep.fold_value(&sweep.param_at(&unflatten(i, d, res), res)))
        .collect();
    let differs = |a: usize, b: usize| {
        let (ga, gb) = (values[a], values[b]);
        ga.is_finite() && gb.is_finite() && ((ga > 0.0) != (gb > 0.0))
    };
    // Each emitted piece is a list of grid edges (pairs of node indices).
    let mut pieces: Vec<Vec<(usize, usize)>> = Vec::new();
    let cells = res.pow(d as u32);
    for c in 0..cells {
        let mut base = Vec::with_capacity(d);
        let mut rem = c;
        for _ in 0..d {
            base.push(rem % res);
            rem /= res;
        }
        let node = |off: &[usize]| {
            let v: Vec<usize> = base.iter().zip(off).map(|(b, o)| b + o).collect();
            flat_index(&v, res)
        };
        if d == 2 {
            let cn = [node(&[0, 0]), node(&[1, 0]), node(&[1, 1]), node(&[0, 1])];
            let edges = [(cn[0], cn[1]), (cn[1], cn[2]), (cn[2], cn[3]), (cn[3], cn[0])];
            let crossing: Vec<usize> = (0..4).filter(|&e| differs(edges[e].0, edges[e].1)).collect();
            match crossing.len() {
                2 => pieces.push(vec![edges[crossing[0]], edges[crossing[1]]]),
                4 => {
                    let centre = sweep.fold_value(&sweep.param_at(&base, res).iter().zip(&sweep.axes).map(|(p, a)| p + 0.5 * (a.hi - a.lo) / res as f64).collect::<Vec<_>>());
                    if (centre > 0.0) == (values[cn[0]] > 0.0) {
                        pieces.push(vec![edges[0], edges[1]]);
                        pieces.push(vec![edges[2], edges[3]]);
                    } else {
                        pieces.push(vec![edges[3], edges[0]]);
                        pieces.push(vec![edges[1], edges[2]]);
                    }
                }
                _ => {}
            }
        } else {
            for tet in TETS.iter() {
                let vs: Vec<usize> = tet.iter().map(|o| node(o)).collect();
                if vs.iter().any(|&v| !values[v].is_finite()) {
                    continue;
                }
                let pos: Vec<usize> = vs.iter().copied().filter(|&v| values[v] > 0.0).collect();
                let neg: Vec<usize> = vs.iter().copied().filter(|&v| values[v] <= 0.0).collect();
                match (pos.len(), neg.len()) {
                    (1, 3) => pieces.push(neg.iter().map(|&b| (pos[0], b)).collect()),
                    (3, 1) => pieces.push(pos.iter().map(|&b| (neg[0], b)).collect()),
                    (2, 2) => {
                        let (a, b, c, e) = (pos[0], pos[1], neg[0], neg[1]);
                        pieces.push(vec![(a, c), (a, e), (b, e)]);
                        pieces.push(vec![(a, c), (b, e), (b, c)]);
                    }
                    _ => {}
                }
            }
        }
    }
    let key = |(a, b): (usize, usize)| (a.min(b), a.max(b));
    let mut edges: Vec<(usize, usize)> = pieces.iter().flatten().map(|&e| key(e)).collect();
    edges.sort_unstable();
    edges.dedup();
    let verts: Vec<Option<Vertex>> = edges
        .par_iter()
        .map(|&(a, b)| {
            let pa = sweep.param_at(&unflatten(a, d, res), res);
            let pb = sweep.param_at(&unflatten(b, d, res), res);
            sweep.crossing(&pa, &pb, values[a], window, eps)
        })
        .collect();
    let mut builder = Builder::new(kind, n, window.spacing(res) / 2.0);
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, v) in edges.iter().zip(verts) {
        if let Some(v) = v {
            let id = builder.add(v);
            ids.insert(*e, id);
        }
    }
    for piece in &pieces {
        let got: Option<Vec<usize>> = piece.iter().map(|&e| ids.get(&key(e)).copied()).collect();
        match got.as_deref() {
            Some([a, b]) => builder.segment(*a, *b),
            Some([a, b, c]) => builder.triangle(*a, *b, *c),
            _ => {}
        }
    }
    builder.finish()
}

fn extract_quasi(sweep: &Sweep, kind: ComponentKind, n: usize, window: &Window, res: usize, eps: f64) -> Component {
    let d = sweep.dim();
    let total = (res + 1).pow(d as u32);
    let verts: Vec<Option<Vertex>> = (0..total)
        .into_par_iter()
        .map(|i| sweep.vertex(&sweep.param_at(&unflatten(i, d, res), res), window, eps))
        .collect();
    let mut builder = Builder::new(kind, n, window.spacing(res) / 2.0);
    let ids: Vec<Option<usize>> = verts.into_iter().map(|v| v.map(|v| builder.add(v))).collect();
    match d {
        0 => {}
        1 => {
            for i in 0..res {
                if let (Some(a), Some(b)) = (ids[i], ids[i + 1]) {
                    builder.segment(a, b);
                }
            }
        }
        _ => {
            for j in 0..res {
                for i in 0..res {
                    let at = |di: usize, dj: usize| ids[flat_index(&[i + di, j + dj], res)];
                    if let (Some(a), Some(b), Some(c), Some(e)) = (at(0, 0), at(1, 0), at(1, 1), at(0, 1)) {
                        builder.triangle(a, b, c);
                        builder.triangle(a, c, e);
                    } else {
                        // Keep the edges that survive the window cut.
                        for (p, q) in [(at(0, 0), at(1, 0)), (at(0, 0), at(0, 1))] {
                            if let (Some(a), Some(b)) = (p, q) {
                                builder.segment(a, b);
                            }
                        }
                    }
                }
            }
        }
    }
    builder.finish()
}

/// Fold caustic `C_sigma` inside `window`.
pub fn caustic_stratum(
    family: &GeneratingFamily,
    sigma: &Stratum,
    window: &Window,
    resolution: usize,
    options: &CausticOptions,
) -> Result<Component, CausticError> {
    validate(family, window, resolution)?;
    let n = family.rkn().2;
    let sys = stratum_equations(family, sigma)?;
    if sys.hessian_det.is_none() || window.is_degenerate() {
        return Ok(Component::empty(sys.kind, n));
    }
    let Some(sweep) = Sweep::new(family, &sys, window, options.bound_for(window))? else {
        return Ok(Component::empty(sys.kind, n));
    };
    Ok(extract_fold(&sweep, sys.kind.clone(), n, window, resolution, options.eps))
}

/// Quasi-caustic `Q_{sigma,tau}` inside `window`.
pub fn quasi_caustic(
    family: &GeneratingFamily,
    sigma: &Stratum,
    tau: &Stratum,
    window: &Window,
    resolution: usize,
    options: &CausticOptions,
) -> Result<Component, CausticError> {
    validate(family, window, resolution)?;
    let n = family.rkn().2;
    let sys = quasi_equations(family, sigma, tau, options.half_lines)?;
    if window.is_degenerate() {
        return Ok(Component::empty(sys.kind, n));
    }
    let Some(sweep) = Sweep::new(family, &sys, window, options.bound_for(window))? else {
        return Ok(Component::empty(sys.kind, n));
    };
    Ok(extract_quasi(&sweep, sys.kind.clone(), n, window, resolution, options.eps))
}

/// Pairs `(sigma, tau)` with `sigma` inside `tau` and one index more.
pub fn quasi_pairs(r: usize) -> Vec<(Stratum, Stratum)> {
    let all = Stratum::all(r);
    let mut out = Vec::new();
    for s in &all {
        for t in &all {
            if t.len() == s.len() + 1 && s.is_subset(t) {
                out.push((s.clone(), t.clone()));
            }
        }
    }
    out
}

/// A three-parameter slice `q_j = 0` of a four-parameter family, for drawing.
/// Takes the last `j` for which every stratum still sweeps (its criticality
/// equations stay solvable for the remaining parameters).
pub fn three_parameter_slice(family: &GeneratingFamily) -> Result<(GeneratingFamily, usize), CausticError> {
    let (r, _, n) = family.rkn();
    if n != 4 {
        return Err(CausticError::UnsupportedDimension(n));
    }
    let window = Window::cube(3, -1.0, 1.0)?;
    for j in (0..n).rev() {
        let slice = family.slice(j, &Rational::zero())?;
        let mut systems = Vec::new();
        for s in Stratum::all(r) {
            systems.push(stratum_equations(&slice, &s)?);
        }
        for (s, t) in quasi_pairs(r) {
            systems.push(quasi_equations(&slice, &s, &t, false)?);
        }
        if systems.iter().all(|sys| Sweep::new(&slice, sys, &window, 1.0).is_ok()) {
            return Ok((slice, j));
        }
    }
    Err(CausticError::Degenerate("no sweepable three-parameter slice".into()))
}

/// Every fold caustic and quasi-caustic of the family; empty pieces are
/// left out.
pub fn full_caustic(
    family: &GeneratingFamily,
    window: &Window,
    resolution: usize,
    options: &CausticOptions,
) -> Result<CausticGeometry, CausticError> {
    validate(family, window, resolution)?;
    let r = family.rkn().0;
    let mut components = Vec::new();
    for s in Stratum::all(r) {
        components.push(caustic_stratum(family, &s, window, resolution, options)?);
    }
    for (s, t) in quasi_pairs(r) {
        components.push(quasi_caustic(family, &s, &t, window, resolution, options)?);
    }
    components.retain(|c| !c.is_empty());
    Ok(CausticGeometry {
        family: family.clone(),
        window: window.clone(),
        resolution,
        options: options.clone(),
        components,
    })
}

/// Re-evaluates every defining condition at every stored witness.
pub fn residual_check(geometry: &CausticGeometry, family: &GeneratingFamily, eps: f64) -> bool {
    let mut systems: BTreeMap<ComponentKind, DefiningSystem> = BTreeMap::new();
    for c in &geometry.components {
        let sys = match &c.kind {
            ComponentKind::Caustic(s) => stratum_equations(family, s),
            ComponentKind::Quasi(s, t) => quasi_equations(family, s, t, geometry.options.half_lines),
        };
        match sys {
            Ok(sys) => {
                systems.insert(c.kind.clone(), sys);
            }
            Err(_) => return false,
        }
    }
    geometry.components.iter().all(|c| {
        let sys = &systems[&c.kind];
        let eqs: Vec<CompiledPoly> = sys.equations().iter().map(CompiledPoly::new).collect();
        let signs: Vec<CompiledPoly> = sys.sign_conditions.iter().map(CompiledPoly::new).collect();
        c.points.len() == c.witnesses.len()
            && c.points.iter().zip(&c.witnesses).all(|(q, w)| {
                let z: Vec<f64> = w.iter().chain(q).copied().collect();
                if z.len() != family.space().len() || z.iter().any(|v| !v.is_finite()) {
                    return false;
                }
                eqs.iter().all(|e| e.eval(&z).abs() < eps)
                    && sys.nonneg.iter().all(|&i| z[i] >= -eps)
                    && signs.iter().all(|s| s.eval(&z) >= -eps)
            })
    })
}

/// Brute-force count of interior critical points of stratum `sigma` at the
/// parameter value `q`: Newton from a grid of starts (or sign changes when
/// there is one unknown) inside the witness box `[0, bound]` (corner) and
/// `[-bound, bound]` (fibre).
pub fn oracle_critical_counts(
    family: &GeneratingFamily,
    sigma: &Stratum,
    q: &[f64],
    bound: f64,
    grid: usize,
) -> Result<usize, CausticError> {
    let oracle = Oracle::new(family, sigma)?;
    Ok(oracle.count(q, bound, grid.max(2)))
}

struct Oracle {
    r: usize,
    qoff: usize,
    nvars: usize,
    free: Vec<usize>,
    eqs: Vec<CompiledPoly>,
    jac: Vec<Vec<CompiledPoly>>,
}

impl Oracle {
    fn new(family: &GeneratingFamily, sigma: &Stratum) -> Result<Self, CausticError> {
        let sys = stratum_equations(family, sigma)?;
        let (r, k, _) = family.rkn();
        let jac = sys
            .critical
            .iter()
            .map(|g| sys.free_vars.iter().map(|&v| CompiledPoly::new(&g.differentiate(v))).collect())
            .collect();
        Ok(Self {
            r,
            qoff: r + k,
            nvars: family.space().len(),
            free: sys.free_vars.clone(),
            eqs: sys.critical.iter().map(CompiledPoly::new).collect(),
            jac,
        })
    }

    fn range(&self, v: usize, bound: f64) -> (f64, f64) {
        if v < self.r {
            (0.0, bound)
        } else {
            (-bound, bound)
        }
    }

    fn inside(&self, z: &[f64], bound: f64) -> bool {
        self.free.iter().all(|&v| {
            let (lo, hi) = self.range(v, bound);
            let lo_ok = if v < self.r { z[v] > 1e-12 } else { z[v] >= lo };
            lo_ok && z[v] <= hi
        })
    }

    fn norm(&self, z: &[f64]) -> f64 {
        self.eqs.iter().map(|e| e.eval(z).abs()).fold(0.0, f64::max)
    }

    fn newton(&self, mut z: Vec<f64>) -> Option<Vec<f64>> {
        let mut res = self.norm(&z);
        for _ in 0..60 {
            if res < 1e-12 {
                return Some(z);
            }
            let a: Vec<Vec<f64>> = self.jac.iter().map(|row| row.iter().map(|p| p.eval(&z)).collect()).collect();
            let b: Vec<f64> = self.eqs.iter().map(|e| -e.eval(&z)).collect();
            let step = solve_dense(a, b, 1e-14)?;
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..20 {
                let mut trial = z.clone();
                for (c, &v) in self.free.iter().enumerate() {
                    trial[v] += t * step[c];
                }
                let tr = self.norm(&trial);
                if tr < res || tr < 1e-12 {
                    z = trial;
                    res = tr;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if res < 1e-9 {
            Some(z)
        } else {
            None
        }
    }

    fn count(&self, q: &[f64], bound: f64, grid: usize) -> usize {
        let d = self.free.len();
        if d == 0 {
            return 1;
        }
        let mut base = vec![0.0; self.nvars];
        base[self.qoff..].copy_from_slice(q);
        let mut roots: Vec<Vec<f64>> = Vec::new();
        let keep = |z: Vec<f64>, roots: &mut Vec<Vec<f64>>| {
            if !self.inside(&z, bound) {
                return;
            }
            let w: Vec<f64> = self.free.iter().map(|&v| z[v]).collect();
            if roots.iter().all(|r| r.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) > 1e-6) {
                roots.push(w);
            }
        };
        if d == 1 {
            let v = self.free[0];
            let (lo, hi) = self.range(v, bound);
            let steps = grid * 16;
            let at = |t: f64| {
                let mut z = base.clone();
                z[v] = t;
                z
            };
            let g = |t: f64| self.eqs[0].eval(&at(t));
            let mut prev_t = lo;
            let mut prev = g(lo);
            for s in 1..=steps {
                let t = lo + (hi - lo) * s as f64 / steps as f64;
                let cur = g(t);
                if prev == 0.0 {
                    keep(at(prev_t), &mut roots);
                } else if (prev > 0.0) != (cur > 0.0) && cur != 0.0 {
                    let (mut a, mut b) = (prev_t, t);
                    for _ in 0..100 {
                        let m = 0.5 * (a + b);
                        if (g(m) > 0.0) == (prev > 0.0) {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    keep(at(0.5 * (a + b)), &mut roots);
                }
                prev_t = t;
                prev = cur;
            }
            if prev == 0.0 {
                keep(at(prev_t), &mut roots);
            }
            return roots.len();
        }
        let starts = grid.pow(d as u32);
        for s in 0..starts {
            let mut z = base.clone();
            let mut rem = s;
            for &v in &self.free {
                let (lo, hi) = self.range(v, bound);
                let i = rem % grid;
                rem /= grid;
                z[v] = lo + (hi - lo) * (i as f64 + 0.5) / grid as f64;
            }
            if let Some(root) = self.newton(z) {
                keep(root, &mut roots);
            }
        }
        roots.len()
    }
}

/// Oracle counts over a grid of parameter cells (two parameters only).
#[derive(Clone, Debug)]
pub struct OracleGrid {
    pub window: Window,
    pub grid: usize,
    /// Count vector (one entry per stratum) at each cell centre, row-major
    /// with the first parameter varying fastest.
    pub counts: Vec<Vec<usize>>,
}

impl OracleGrid {
    pub fn centre(&self, i: usize, j: usize) -> [f64; 2] {
        let r = self.window.ranges();
        let h0 = (r[0].1 - r[0].0) / self.grid as f64;
        let h1 = (r[1].1 - r[1].0) / self.grid as f64;
        [r[0].0 + (i as f64 + 0.5) * h0, r[1].0 + (j as f64 + 0.5) * h1]
    }

    pub fn cell_of(&self, q: &[f64]) -> Option<(usize, usize)> {
        let r = self.window.ranges();
        let idx = |v: f64, (lo, hi): (f64, f64)| {
            let t = ((v - lo) / (hi - lo) * self.grid as f64).floor();
            if t < 0.0 || t > self.grid as f64 {
                None
            } else {
                Some((t as usize).min(self.grid - 1))
            }
        };
        Some((idx(q[0], r[0])?, idx(q[1], r[1])?))
    }

    /// Cells whose count vector differs from some 4-neighbour.
    pub fn change_cells(&self) -> Vec<(usize, usize)> {
        let g = self.grid;
        let at = |i: usize, j: usize| &self.counts[j * g + i];
        let mut out = Vec::new();
        for j in 0..g {
            for i in 0..g {
                let c = at(i, j);
                let mut nb = Vec::new();
                if i > 0 {
                    nb.push((i - 1, j));
                }
                if i + 1 < g {
                    nb.push((i + 1, j));
                }
                if j > 0 {
                    nb.push((i, j - 1));
                }
                if j + 1 < g {
                    nb.push((i, j + 1));
                }
                if nb.iter().any(|&(a, b)| at(a, b) != c) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Evaluates the oracle for every stratum at every cell centre of a 2D window.
pub fn oracle_grid(
    family: &GeneratingFamily,
    window: &Window,
    grid: usize,
    bound: f64,
    starts: usize,
) -> Result<OracleGrid, CausticError> {
    if family.rkn().2 != 2 || window.dim() != 2 {
        return Err(CausticError::UnsupportedDimension(family.rkn().2));
    }
    if grid < 2 {
        return Err(CausticError::InvalidResolution);
    }
    let oracles: Vec<Oracle> = Stratum::all(family.rkn().0)
        .iter()
        .map(|s| Oracle::new(family, s))
        .collect::<Result<_, _>>()?;
    let mut out = OracleGrid { window: window.clone(), grid, counts: Vec::new() };
    out.counts = (0..grid * grid)
        .into_par_iter()
        .map(|c| {
            let q = out.centre(c % grid, c / grid);
            oracles.iter().map(|o| o.count(&q, bound, starts.max(2))).collect()
        })
        .collect();
    Ok(out)
}

/// Overlay statistics between an oracle grid and computed geometry, with
/// distances measured in cells (Chebyshev).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Agreement {
    pub tolerance: usize,
    /// Computed points inside the window.
    pub points: usize,
    /// Computed points farther than `tolerance` from every change cell.
    pub unmatched_points: usize,
    pub change_cells: usize,
    /// Change cells farther than `tolerance` from every computed point.
    pub unmatched_cells: usize,
    pub max_point_distance: usize,
    pub max_cell_distance: usize,
}

impl Agreement {
    pub fn holds(&self) -> bool {
        self.unmatched_points == 0 && self.unmatched_cells == 0
    }
}

/// Cell distance to the nearest marked cell, capped at `cap + 1`.
fn nearest(marks: &[bool], g: usize, i: usize, j: usize, cap: usize) -> usize {
    for d in 0..=cap {
        let (i0, i1) = (i.saturating_sub(d), (i + d).min(g - 1));
        let (j0, j1) = (j.saturating_sub(d), (j + d).min(g - 1));
        for b in j0..=j1 {
            for a in i0..=i1 {
                if marks[b * g + a] {
                    return d;
                }
            }
        }
    }
    cap + 1
}

/// Compares oracle count changes with the computed components in both
/// directions.
pub fn oracle_agreement(oracle: &OracleGrid, geometry: &CausticGeometry, tolerance: usize) -> Agreement {
    let g = oracle.grid;
    let mut change = vec![false; g * g];
    let cells = oracle.change_cells();
    for &(i, j) in &cells {
        change[j * g + i] = true;
    }
    let mut hit = vec![false; g * g];
    let mut out = Agreement {
        tolerance,
        points: 0,
        unmatched_points: 0,
        change_cells: cells.len(),
        unmatched_cells: 0,
        max_point_distance: 0,
        max_cell_distance: 0,
    };
    let far = 4 * tolerance + 4;
    for p in geometry.components.iter().flat_map(|c| &c.points) {
        let Some((i, j)) = oracle.cell_of(p) else { continue };
        hit[j * g + i] = true;
        out.points += 1;
        let d = nearest(&change, g, i, j, far);
        out.max_point_distance = out.max_point_distance.max(d);
        out.unmatched_points += (d > tolerance) as usize;
    }
    for &(i, j) in &cells {
        let d = nearest(&hit, g, i, j, far);
        out.max_cell_distance = out.max_cell_distance.max(d);
        out.unmatched_cells += (d > tolerance) as usize;
    }
    out
}
