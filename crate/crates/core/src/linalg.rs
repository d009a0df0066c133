//! Sparse exact row reduction over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::poly::Rational;

pub type SparseRow = BTreeMap<usize, Rational>;

/// Incrementally built echelon form. Each stored row has leading entry 1 at
/// its pivot column and zeros in all earlier columns.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    ncols: usize,
    pivots: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, pivots: BTreeMap::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    /// Reduces `v` against the stored rows.
    pub fn reduce(&self, mut v: SparseRow) -> SparseRow {
        let mut start = 0usize;
        loop {
            let next = v.range(start..).map(|(&c, _)| c).find(|c| self.pivots.contains_key(c));
            let Some(col) = next else { break };
            let factor = v[&col].clone();
            for (c, val) in &self.pivots[&col] {
                let e = v.entry(*c).or_insert_with(Rational::zero);
                *e -= &factor * val;
                if e.is_zero() {
                    v.remove(c);
                }
            }
            start = col + 1;
        }
        v
    }

    /// Adds a row; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseRow) -> bool {
        let v = self.reduce(v);
        let Some((&lead, lv)) = v.iter().next() else { return false };
        debug_assert!(lead < self.ncols);
        let inv = Rational::one() / lv;
        let row: SparseRow = v.into_iter().map(|(c, x)| (c, x * &inv)).collect();
        self.pivots.insert(lead, row);
        true
    }

    pub fn contains(&self, v: SparseRow) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn contains_unit(&self, col: usize) -> bool {
        let mut v = SparseRow::new();
        v.insert(col, Rational::one());
        self.contains(v)
    }

    /// Fully reduced row-echelon rows, ordered by pivot column.
    pub fn rref(&self) -> Vec<SparseRow> {
        let cols: Vec<usize> = self.pivots.keys().copied().collect();
        let mut rows: Vec<SparseRow> = cols.iter().map(|c| self.pivots[c].clone()).collect();
        for i in (0..rows.len()).rev() {
            let pc = cols[i];
            let pr = rows[i].clone();
            for row in rows.iter_mut().take(i) {
                if let Some(f) = row.get(&pc).cloned() {
                    for (c, val) in &pr {
                        let e = row.entry(*c).or_insert_with(Rational::zero);
                        *e -= &f * val;
                        if e.is_zero() {
                            row.remove(c);
                        }
                    }
                }
            }
        }
        rows
    }
}

/// Dense helper: rank of a matrix given as rows.
pub fn rank_of(rows: &[SparseRow], ncols: usize) -> usize {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r.clone());
    }
    e.rank()
}

/// Solution of `A x = b` over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    Inconsistent,
    /// Particular solution plus a basis of the null space.
    Affine { particular: Vec<Rational>, null_space: Vec<Vec<Rational>> },
}

/// Solves `A x = b` exactly. Rows of `a` are sparse over `ncols` columns.
pub fn solve(a: &[SparseRow], b: &[Rational], ncols: usize) -> LinearSolution {
    assert_eq!(a.len(), b.len());
    // Augment with the right-hand side in column `ncols`.
    let mut e = Echelon::new(ncols + 1);
    for (row, rhs) in a.iter().zip(b) {
        let mut r = row.clone();
        if !rhs.is_zero() {
            r.insert(ncols, rhs.clone());
        }
        e.insert(r);
    }
    if e.pivots.contains_key(&ncols) {
        return LinearSolution::Inconsistent;
    }
    let rows = e.rref();
    let pivot_cols: Vec<usize> = rows.iter().map(|r| *r.keys().next().unwrap()).collect();
    let free: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut particular = vec![Rational::zero(); ncols];
    for (row, &pc) in rows.iter().zip(&pivot_cols) {
        if let Some(v) = row.get(&ncols) {
            particular[pc] = v.clone();
        }
    }
    let mut null_space = Vec::new();
    for &fc in &free {
        let mut v = vec![Rational::zero(); ncols];
        v[fc] = Rational::one();
        for (row, &pc) in rows.iter().zip(&pivot_cols) {
            if let Some(x) = row.get(&fc) {
                v[pc] = -x.clone();
            }
        }
        null_space.push(v);
    }
    LinearSolution::Affine { particular, null_space }
}

pub fn dense_to_sparse(v: &[Rational]) -> SparseRow {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int;

    fn row(v: &[i64]) -> SparseRow {
        dense_to_sparse(&v.iter().map(|&x| int(x)).collect::<Vec<_>>())
    }

    #[test]
    fn rank_and_membership() {
        let mut e = Echelon::new(3);
        assert!(e.insert(row(&[1, 2, 0])));
        assert!(e.insert(row(&[0, 1, 1])));
        assert!(!e.insert(row(&[1, 3, 1])));
        assert_eq!(e.rank(), 2);
        assert!(e.contains(row(&[2, 5, 1])));
        assert!(!e.contains_unit(2) || e.rank() == 3);
    }

    #[test]
    fn rref_is_reduced() {
        let mut e = Echelon::new(3);
        e.insert(row(&[1, 2, 3]));
        e.insert(row(&[0, 1, 4]));
        let r = e.rref();
        assert_eq!(r[0].get(&1), None);
        assert_eq!(r[0][&2], int(-5));
    }

    #[test]
    fn solve_affine_and_inconsistent() {
        let a = vec![row(&[1, 1, 0]), row(&[0, 1, -1])];
        match solve(&a, &[int(2), int(0)], 3) {
            LinearSolution::Affine { particular, null_space } => {
                assert_eq!(particular, vec![int(2), int(0), int(0)]);
                assert_eq!(null_space, vec![vec![int(-1), int(1), int(1)]]);
            }
            _ => panic!(),
        }
        let a = vec![row(&[1, 1]), row(&[2, 2])];
        assert_eq!(solve(&a, &[int(1), int(3)], 2), LinearSolution::Inconsistent);
    }
}
