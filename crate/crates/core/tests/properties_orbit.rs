//! Property tests for the orbit-tangency systems.

use proptest::prelude::*;
use reticular_core::orbit::{
    build_tangency_system, catalog_case, is_tangent, is_tangent_control, modal_direction, symplectic_check, CaseId,
    LinearSystem,
};
use reticular_core::poly::{rat, VarSpace};
use reticular_core::{Monomial, Poly, Rational};

fn case_id() -> impl Strategy<Value = CaseId> {
    prop::sample::select(CaseId::ALL.to_vec())
}

fn modulus() -> impl Strategy<Value = Rational> {
    (1i64..=12, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

/// Reorders rows and relabels unknown columns.
fn permuted(sys: &LinearSystem, rows: &[usize], cols: &[usize]) -> LinearSystem {
    let mut out = sys.clone();
    out.rows = rows.iter().map(|&i| sys.rows[i].clone()).collect();
    for r in &mut out.rows {
        r.coeffs = r.coeffs.iter().map(|(c, v)| (cols[*c], v.clone())).collect();
    }
    let mut unknowns = sys.unknowns.clone();
    for (old, &new) in cols.iter().enumerate() {
        unknowns[new] = sys.unknowns[old].clone();
    }
    out.unknowns = unknowns;
    out
}

fn shuffle(n: usize, seed: &[u32]) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = seed[i % seed.len()] as usize % (i + 1);
        v.swap(i, j);
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn identities_hold_across_the_domain(id in case_id(), a in modulus()) {
        let case = catalog_case(id);
        prop_assume!(case.in_domain(&a));
        prop_assert!(symplectic_check(&case.map_at(&a)));
        prop_assert!(modal_direction(&case, &a).is_ok());
        prop_assert!(!is_tangent(&case, &a).unwrap());
    }

    #[test]
    fn pure_p_rows_decouple(id in case_id(), a in modulus()) {
        let case = catalog_case(id);
        prop_assume!(case.in_domain(&a));
        prop_assert!(build_tangency_system(&case, &a).unwrap().pure_p_rows_decoupled(&case));
    }

    #[test]
    fn ranks_ignore_row_and_column_order(id in case_id(), seed in prop::collection::vec(any::<u32>(), 1..16)) {
        let case = catalog_case(id);
        let a = rat(1, 1);
        let sys = build_tangency_system(&case, &a).unwrap();
        let rows = shuffle(sys.rows.len(), &seed);
        let cols = shuffle(sys.unknowns.len(), &seed.iter().map(|s| s.rotate_left(7)).collect::<Vec<_>>());
        let p = permuted(&sys, &rows, &cols);
        prop_assert_eq!(p.rank(), sys.rank());
        prop_assert_eq!(p.augmented_rank(), sys.augmented_rank());
        prop_assert_eq!(p.is_solvable(), sys.is_solvable());
    }

    #[test]
    fn constructed_targets_are_tangent(
        id in case_id(),
        a in modulus(),
        coeffs in prop::collection::vec((-4i64..=4, 1i64..=3), 64),
    ) {
        let case = catalog_case(id);
        prop_assume!(case.in_domain(&a));
        let qs = VarSpace::corner(0, 0, case.n);
        let mut next = coeffs.iter().cycle();
        let top = case.ideal_degree;
        let h: Vec<Poly> = (0..=case.n)
            .map(|slot| {
                let low = if slot == 0 { 2 } else { 1 };
                let terms: Vec<(Monomial, Rational)> = Monomial::all_up_to(case.n, top)
                    .into_iter()
                    .filter(|m| m.degree() >= low)
                    .map(|m| {
                        let (n, d) = next.next().unwrap();
                        (m, rat(*n, *d))
                    })
                    .collect();
                Poly::from_terms(&qs, terms)
            })
            .collect();
        prop_assert!(is_tangent_control(&case, &a, &h).unwrap());
    }
}
