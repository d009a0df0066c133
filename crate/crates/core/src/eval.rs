//! Floating-point evaluation of exact polynomials, for sweeps and oracles.

use crate::poly::{to_f64, Poly};

/// A polynomial flattened to `(coefficient, [(variable, exponent)])` terms.
#[derive(Clone, Debug, Default)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Poly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let vars = m
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e as i32))
                    .collect();
                (to_f64(c), vars)
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, vars)| vars.iter().fold(*c, |acc, &(i, e)| acc * z[i].powi(e)))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Solves the dense system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when a pivot falls below `tol` relative to the row scale.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let scale = a.iter().skip(col).map(|r| r[col].abs()).fold(0.0, f64::max);
        let (piv, _) = a
            .iter()
            .enumerate()
            .skip(col)
            .map(|(i, r)| (i, r[col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if scale == 0.0 || a[piv][col].abs() < tol {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_expression;
    use crate::poly::VarSpace;

    #[test]
    fn compiled_matches_exact() {
        let sp = VarSpace::corner(2, 0, 1);
        let p = parse_expression("x1^2 - 3*x1*x2 + 1/2*q1 + 2", &sp).unwrap();
        let c = CompiledPoly::new(&p);
        assert!((c.eval(&[1.0, 2.0, 4.0]) - (1.0 - 6.0 + 2.0 + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn dense_solve() {
        let x = solve_dense(vec![vec![0.0, 2.0], vec![1.0, 1.0]], vec![4.0, 3.0], 1e-14).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        assert!(solve_dense(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0], 1e-12).is_none());
    }
}
