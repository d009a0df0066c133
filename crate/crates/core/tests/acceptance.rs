//! Acceptance run: one PASS/FAIL line per criterion. Criteria listed in
//! `KNOWN_FAILURES` are reported honestly but do not fail the target.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use reticular_core::caustic::{
    full_caustic, oracle_agreement, oracle_grid, residual_check, CausticOptions, ComponentKind, Stratum, Window,
};
use reticular_core::classify::{catalog, classify_germ, Group, Regime};
use reticular_core::localalg::{check_infinitesimal_versality, codimension, is_quasihomogeneous, CodimValue, Relation};
use reticular_core::orbit::{
    build_tangency_system, catalog_case, is_tangent, modal_direction, solve_subsystem, symplectic_check, CaseId,
};
use reticular_core::poly::{int, rat, Rational};
use reticular_core::render::catalog_figure;
use reticular_core::{GeneratingFamily, Germ};

/// The printed four-parameter corner-fibre unfoldings leave one corner
/// coordinate uncovered, so they cannot pass the versality criterion.
const KNOWN_FAILURES: &[u32] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn germ(text: &str, r: usize, k: usize) -> Germ {
    Germ::parse(text, r, k).unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// Caustic-regime table rows, modulus rows at a = 1/5, 1/3 and -1/3.
fn caustic_rows() -> Vec<(&'static str, Germ)> {
    vec![
        ("B_{2,2,a}^{+,+,1}", germ("x1^2+x1*x2+1/5*x2^2", 2, 0)),
        ("B_{2,2,a}^{+,+,2}", germ("x1^2+x1*x2+1/3*x2^2", 2, 0)),
        ("B_{2,2,a}^{+,-}", germ("x1^2+x1*x2-1/3*x2^2", 2, 0)),
        ("B_{2,2}^{+,0}", germ("x1^2+x2^2", 2, 0)),
        ("B_{2,2,3}^{+,+}", germ("(x1+x2)^2+x2^3", 2, 0)),
        ("B_{2,3}^{+,+}", germ("x1^2+x1*x2+x2^3", 2, 0)),
        ("B_{3,2}^{+,+}", germ("x1^3+x1*x2+x2^2", 2, 0)),
        ("B_{2,3'}^{+,+}", germ("x1^2+x1*x2^2+x2^3", 2, 0)),
        ("B_{3,2'}^{+,+}", germ("x1^3+x1^2*x2+x2^2", 2, 0)),
        ("C_{3,2}^{+,+}", germ("y^3+x1*y+x2*y+x2^2", 2, 1)),
        ("C_{3,2,1}^{+,+}", germ("y^3+x1*y+x2*y^2+x2^2", 2, 1)),
        ("C_{3,2,2}^{+,+}", germ("y^3+x2*y+x1*y^2+x1^2", 2, 1)),
    ]
}

fn criterion_1() -> Outcome {
    let expected = [3, 3, 3, 3, 3, 3, 3, 4, 4, 3, 4, 4];
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for ((label, g), want) in caustic_rows().iter().zip(expected) {
        let t = Instant::now();
        let c = codimension(g, Relation::C, 7);
        let dt = t.elapsed();
        slowest = slowest.max(dt);
        if c.value != CodimValue::Finite(want) || c.jet_order > 8 || dt > Duration::from_secs(1) {
            bad.push(format!("{label}: {} at N={} in {}", c.value, c.jet_order, secs(dt)));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { format!("12 rows match, slowest {}", secs(slowest)) } else { bad.join("; ") })
}

fn criterion_2() -> Outcome {
    let rows = [
        ("x1^2+x1*x2+1/5*x2^2", 0, 2),
        ("x1^2+x1*x2+x2^2", 0, 2),
        ("x1^2+x1*x2-x2^2", 0, 2),
        ("x1^2+x2^2", 0, 3),
        ("(x1+x2)^2+x2^3", 0, 3),
        ("x1^2+x1*x2+x2^3", 0, 3),
        ("x1^2+x1*x2^2+x2^3", 0, 4),
        ("x1^3+x1^2*x2+x2^2", 0, 4),
        ("x1^3+x1*x2+x2^2", 0, 3),
        ("y^3+x1*y+x2*y+x2^2", 1, 3),
        ("y^3+x1*y+x2*y^2+x2^2", 1, 4),
        ("y^3+x2*y+x1*y^2+x1^2", 1, 4),
    ];
    let mut bad = Vec::new();
    for (text, k, want) in rows {
        let rep = classify_germ(&germ(text, 2, k)).unwrap();
        let caustic = rep.codim_caustic.finite();
        let derived = caustic.map(|c| c - rep.modulus_count);
        if rep.codim_weak != Some(want) || derived != Some(want) {
            bad.push(format!("{text}: weak {:?}", rep.codim_weak));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "12 weak rows match".to_string() } else { bad.join("; ") })
}

fn criterion_3() -> Outcome {
    let mut bad = Vec::new();
    for l in 2..=6u32 {
        let c = codimension(&germ(&format!("x^{l}"), 1, 0), Relation::C, 7);
        if c.value != CodimValue::Finite(l as usize - 1) || c.cobasis.len() != l as usize - 1 {
            bad.push(format!("B_{l}: {}", c.value));
        }
    }
    // Pinned from the first computation; stable under raising the jet order.
    let pinned = [
        ("x*y+y^3", 2),
        ("x*y-y^3", 2),
        ("x*y+y^4", 3),
        ("x*y+y^5", 4),
        ("x*y-y^5", 4),
        ("x*y+y^6", 5),
        ("x^2+y^3", 3),
    ];
    for (text, want) in pinned {
        let g = germ(text, 1, 1);
        for n in [6, 8, 10] {
            let c = codimension(&g, Relation::C, n);
            if c.value != CodimValue::Finite(want) {
                bad.push(format!("{text} at N={n}: {}", c.value));
            }
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() { "B_2..B_6, C_3..C_6, F_4 as pinned".to_string() } else { bad.join("; ") },
    )
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for e in catalog() {
        if is_quasihomogeneous(&e.representative).unwrap().is_some() {
            checked += 1;
            let c = codimension(&e.representative, Relation::C, 7).value;
            let rp = codimension(&e.representative, Relation::RPlus, 7).value;
            if c != rp {
                bad.push(format!("{}: C {c} vs R+ {rp}", e.label));
            }
        }
    }
    let g = germ("x1^2+x1*x2+x2^3", 2, 0);
    let qh = is_quasihomogeneous(&g).unwrap().is_some();
    let c = codimension(&g, Relation::C, 7).value.finite();
    let rp = codimension(&g, Relation::RPlus, 7).value.finite();
    if qh || c.zip(rp).map(|(c, rp)| c + 1 != rp).unwrap_or(true) {
        bad.push(format!("x1^2+x1*x2+x2^3: C {c:?} R+ {rp:?}"));
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() { format!("{checked} quasihomogeneous germs agree; B_{{2,3}} drops by one") } else { bad.join("; ") },
    )
}

fn criterion_5() -> Outcome {
    let mut failing = BTreeSet::new();
    let mut groups = BTreeSet::new();
    let mut weak_ok = 0;
    let mut slowest = Duration::ZERO;
    for e in catalog() {
        let t = Instant::now();
        let v = check_infinitesimal_versality(&e.family, 7);
        slowest = slowest.max(t.elapsed());
        let group = e.group.label(&vec![reticular_core::classify::Sign::Plus; e.group.sign_count()]);
        match e.regime {
            Regime::CausticStable => {
                groups.insert(group.clone());
                if !v.versal {
                    let missing: Vec<String> =
                        v.missing.iter().map(|m| m.to_string_in(e.family.space())).collect();
                    failing.insert(format!("{} (missing {})", group.replace("^{+,+}", ""), missing.join(", ")));
                }
            }
            Regime::WeaklyCausticStable => {
                if !v.versal && v.missing.len() == 1 && v.missing[0].degree() == 2 {
                    weak_ok += 1;
                }
            }
        }
    }
    // Replacing q3*x1*x2 by the bare corner coordinate repairs both families.
    let repaired = [
        "y^3+x1*y+x2*y^2+x2^2+q1*y^2+q2*y+q3*x1+q4*x2",
        "y^3+x2*y+x1*y^2+x1^2+q1*y^2+q2*y+q3*x2+q4*x1",
    ]
    .iter()
    .all(|t| check_infinitesimal_versality(&GeneratingFamily::parse(t, 2, 1, 4).unwrap(), 7).versal);
    let pass = failing.is_empty() && weak_ok == 6 && slowest < Duration::from_secs(1);
    let detail = format!(
        "{} of {} caustic-stable groups versal; weak defects {weak_ok}/6; slowest {}; not versal as printed: {}; repaired variants versal: {repaired}",
        groups.len() - failing.len(),
        groups.len(),
        secs(slowest),
        if failing.is_empty() { "none".to_string() } else { failing.into_iter().collect::<Vec<_>>().join(", ") }
    );
    outcome(pass, detail)
}

fn sample_values() -> [Rational; 3] {
    [rat(1, 2), int(1), int(2)]
}

fn criterion_6() -> Outcome {
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for id in CaseId::ALL {
        let case = catalog_case(id);
        let t = Instant::now();
        for a in sample_values().iter().filter(|a| case.in_domain(a)) {
            if is_tangent(&case, a).unwrap() {
                bad.push(format!("{id} tangent at a = {a}"));
            }
        }
        slowest = slowest.max(t.elapsed());
    }
    let b223 = solve_subsystem(&catalog_case(CaseId::B223pp), &int(1), &["b", "c", "d", "e", "f", "g"]).unwrap();
    let branches: Vec<String> = b223.branches.iter().map(|b| b.to_string()).collect();
    if branches
        != ["b = 0, c = 0, d = 0, e = 0, f free, g free", "b = 1/2*e, c = -1/2*e, d = 0, f = -1, g = 0, e free"]
    {
        bad.push(format!("B223pp branches {branches:?}"));
    }
    let b22 = catalog_case(CaseId::B22a);
    let sys = build_tangency_system(&b22, &int(1)).unwrap().restrict(&["b", "c", "d", "e"]);
    let rows: Vec<String> = ["Q1^2", "Q1*Q2", "Q1*P2", "Q2*P1"]
        .iter()
        .map(|l| sys.row(l).map(|r| sys.row_equation(r)).unwrap_or_default())
        .collect();
    let want = ["Q1^2: -2*b - c = 0", "Q1*Q2: -b - 2*c - 2*d - e = 0", "Q1*P2: -c = 0", "Q2*P1: -d = 0"];
    if rows != want {
        bad.push(format!("B22a rows {rows:?}"));
    }
    if slowest > Duration::from_secs(1) {
        bad.push(format!("slowest case {}", secs(slowest)));
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() { format!("4 cases not tangent, branches and rows match, slowest {}", secs(slowest)) } else { bad.join("; ") },
    )
}

fn criterion_7() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for id in CaseId::ALL {
        let case = catalog_case(id);
        for a in sample_values().iter().filter(|a| case.in_domain(a)) {
            checked += 1;
            if !symplectic_check(&case.map_at(a)) {
                bad.push(format!("{id} not symplectic at {a}"));
            }
            if let Err(e) = modal_direction(&case, a) {
                bad.push(format!("{id} at {a}: {e}"));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { format!("{checked} maps symplectic with exact modal identity") } else { bad.join("; ") })
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let window = Window::cube(2, -2.0, 2.0).unwrap();
    let sets: Vec<_> = [(3, 10), (1, 1), (2, 1)]
        .iter()
        .map(|&(n, d)| {
            let a = n as f64 / d as f64;
            let f = GeneratingFamily::parse(&format!("x1^2+x1*x2+{n}/{d}*x2^2+q1*x1+q2*x2"), 2, 0, 2).unwrap();
            (a, full_caustic(&f, &window, 200, &CausticOptions::default()).unwrap())
        })
        .collect();
    let mut bad = Vec::new();
    let moving = ComponentKind::Quasi(Stratum::empty(), Stratum::new(vec![0]));
    for (a, g) in &sets {
        let Some(c) = g.component(&moving) else {
            bad.push(format!("a = {a}: no moving ray"));
            continue;
        };
        let off = c
            .points
            .iter()
            .map(|q| {
                let norm = q[0].hypot(q[1]).max(1.0);
                let along = if q[0] <= 1e-12 { 0.0 } else { q[0] };
                ((q[1] - 2.0 * a * q[0]).abs() / (1.0 + 4.0 * a * a).sqrt()).max(along) / norm
            })
            .fold(0.0, f64::max);
        if off > 1e-9 || c.points.len() < 2 {
            bad.push(format!("a = {a}: off-direction {off:.2e}"));
        }
    }
    let fixed = [
        ComponentKind::Quasi(Stratum::empty(), Stratum::new(vec![1])),
        ComponentKind::Quasi(Stratum::new(vec![0]), Stratum::full(2)),
        ComponentKind::Quasi(Stratum::new(vec![1]), Stratum::full(2)),
    ];
    for kind in &fixed {
        let base = sets[0].1.component(kind);
        for (a, g) in &sets[1..] {
            let (Some(x), Some(y)) = (base, g.component(kind)) else {
                bad.push(format!("{}: missing at a = {a}", kind.label()));
                continue;
            };
            let gap = hausdorff(&x.points, &y.points);
            if gap > 1e-9 {
                bad.push(format!("{} moves by {gap:.2e} at a = {a}", kind.label()));
            }
        }
    }
    let dt = t.elapsed();
    if dt > Duration::from_secs(5) {
        bad.push(format!("took {}", secs(dt)));
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() { format!("Q_{{∅,1}} along (-1,-2a); three rays fixed; {}", secs(dt)) } else { bad.join("; ") },
    )
}

fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one_way = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.iter()
            .map(|p| b.iter().map(|q| (p[0] - q[0]).hypot(p[1] - q[1])).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let family = GeneratingFamily::parse("x1^2+x1*x2+x2^3+q1*x1+q2*x2+q3*x2^2", 2, 0, 3)
        .unwrap()
        .slice(2, &int(-1))
        .unwrap();
    let window = Window::cube(2, -2.0, 2.0).unwrap();
    let options = CausticOptions { witness_bound: Some(4.0), ..Default::default() };
    let geometry = full_caustic(&family, &window, 800, &options).unwrap();
    let oracle = oracle_grid(&family, &window, 200, 4.0, 6).unwrap();
    let report = oracle_agreement(&oracle, &geometry, 2);
    let dt = t.elapsed();
    let pass = report.holds() && residual_check(&geometry, &family, 1e-9) && dt < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{}/{} points and {}/{} change cells matched within {} cells; {}",
            report.points - report.unmatched_points,
            report.points,
            report.change_cells - report.unmatched_cells,
            report.change_cells,
            report.tolerance,
            secs(dt)
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = std::env::temp_dir().join(format!("reticular-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut bad = Vec::new();
    let (mut svgs, mut plys, mut points) = (0, 0, 0);
    let mut groups: BTreeSet<Group> = BTreeSet::new();
    let weak = catalog().iter().filter(|e| e.regime == Regime::WeaklyCausticStable).count();
    let stable = catalog().iter().filter(|e| e.regime == Regime::CausticStable).count();
    for e in catalog() {
        let resolution = if e.n() == 2 { 200 } else { 32 };
        let fig = catalog_figure(e, 2.0, resolution).unwrap();
        std::fs::write(dir.join(&fig.file_name), &fig.contents).unwrap();
        let family = match fig.sliced {
            Some(j) => e.family.slice(j, &int(0)).unwrap(),
            None => e.family.clone(),
        };
        points += fig.geometry.point_count();
        if !residual_check(&fig.geometry, &family, 1e-9) {
            bad.push(format!("{} not certified", e.label));
        }
        match (e.regime, fig.format) {
            (Regime::WeaklyCausticStable, "svg") => svgs += 1,
            (Regime::CausticStable, "ply") => {
                plys += 1;
                groups.insert(e.group);
            }
            _ => bad.push(format!("{} rendered as {}", e.label, fig.format)),
        }
    }
    let files = std::fs::read_dir(&dir).unwrap().count();
    let _ = std::fs::remove_dir_all(&dir);
    if svgs != weak || weak != 6 || plys != stable || groups.len() != 9 || files != catalog().len() {
        bad.push(format!("{svgs} svg, {plys} ply over {} groups, {files} files", groups.len()));
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{svgs} SVG, {plys} PLY covering {} groups, {points} points certified", groups.len())
        } else {
            bad.join("; ")
        },
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "codimension table", criterion_1),
        (2, "weak table", criterion_2),
        (3, "simple germs", criterion_3),
        (4, "quasihomogeneity", criterion_4),
        (5, "versality split", criterion_5),
        (6, "tangency verdicts", criterion_6),
        (7, "symplectic and modal identities", criterion_7),
        (8, "ray geometry", criterion_8),
        (9, "oracle agreement", criterion_9),
        (10, "geometry certification", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let o = run();
        let known = KNOWN_FAILURES.contains(&id);
        println!("{} {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if o.pass == known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
