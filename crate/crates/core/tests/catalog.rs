use reticular_core::classify::{catalog, classify_germ, weak_class, Group, Regime};
use reticular_core::localalg::{check_infinitesimal_versality, codimension_default, CodimValue, Relation};

#[test]
fn every_entry_classifies_to_itself() {
    for e in catalog() {
        let rep = classify_germ(&e.representative).unwrap();
        assert!(rep.matches(e), "{}: got {:?}", e.label, rep.label);
        assert_eq!(rep.codim_caustic, CodimValue::Finite(e.codim_caustic), "{}", e.label);
        assert_eq!(rep.codim_weak, Some(e.codim_weak), "{}", e.label);
    }
}

#[test]
fn entry_codims_match_local_algebra() {
    for e in catalog() {
        let c = codimension_default(&e.representative, Relation::C);
        assert!(c.stabilized, "{}", e.label);
        assert_eq!(c.value, CodimValue::Finite(e.codim_caustic), "{}", e.label);
        assert_eq!(e.codim_weak, e.codim_caustic - e.modulus_count);
    }
}

#[test]
fn regimes_split_by_versality() {
    for e in catalog() {
        let v = check_infinitesimal_versality(&e.family, 7);
        match e.regime {
            // The printed unfoldings of these two use x1*x2 where the
            // quotient needs the bare corner coordinate.
            Regime::CausticStable if e.group == Group::C321 => {
                assert_eq!(names(&v.missing, e), ["x1"]);
            }
            Regime::CausticStable if e.group == Group::C322 => {
                assert_eq!(names(&v.missing, e), ["x2"]);
            }
            Regime::CausticStable => assert!(v.versal, "{} missing {:?}", e.label, v.missing),
            Regime::WeaklyCausticStable => {
                assert!(!v.versal);
                assert_eq!(v.missing.len(), 1, "{}", e.label);
                assert_eq!(v.missing[0].degree(), 2);
            }
        }
    }
}

#[test]
fn weak_entries_are_their_own_representatives() {
    for e in catalog().iter().filter(|e| e.regime == Regime::WeaklyCausticStable) {
        let w = weak_class(&classify_germ(&e.representative).unwrap()).unwrap();
        assert_eq!(w.label, e.label);
        assert_eq!(w.representative, e.representative);
    }
}

fn names(ms: &[reticular_core::Monomial], e: &reticular_core::classify::NormalFormEntry) -> Vec<String> {
    ms.iter().map(|m| m.to_string_in(e.representative.space())).collect()
}
