use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use reticular_bench::{entry, CODIM_GERMS};
use reticular_core::localalg::codimension_default;
use reticular_core::poly::rat;
use reticular_core::{catalog_case, classify_germ, full_caustic, is_tangent, CaseId, CausticOptions, Germ, Relation, Window};

fn codimension(c: &mut Criterion) {
    let mut g = c.benchmark_group("codimension");
    for (text, r, k) in CODIM_GERMS {
        let germ = Germ::parse(text, *r, *k).unwrap();
        for rel in [Relation::R, Relation::C] {
            g.bench_with_input(BenchmarkId::new(format!("{rel:?}"), text), &germ, |b, f| {
                b.iter(|| codimension_default(black_box(f), rel))
            });
        }
    }
    g.finish();
}

fn classification(c: &mut Criterion) {
    let germ = Germ::parse("x1^3 + x1*x2 + x2^2", 2, 0).unwrap();
    c.bench_function("classify B32", |b| b.iter(|| classify_germ(black_box(&germ)).unwrap()));
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("caustic");
    g.sample_size(10);
    let plane = entry("B_{2,3}^{+,+}").family.slice(2, &rat(-1, 1)).unwrap();
    let win2 = Window::cube(2, -2.0, 2.0).unwrap();
    for res in [100usize, 400] {
        g.bench_with_input(BenchmarkId::new("B23 slice", res), &res, |b, &res| {
            b.iter(|| full_caustic(&plane, &win2, res, &CausticOptions::default()).unwrap())
        });
    }
    let space = &entry("B_{2,3}^{+,+}").family;
    let win3 = Window::cube(3, -2.0, 2.0).unwrap();
    g.bench_function("B23 mesh 24", |b| {
        b.iter(|| full_caustic(space, &win3, 24, &CausticOptions::default()).unwrap())
    });
    g.finish();
}

fn tangency(c: &mut Criterion) {
    let mut g = c.benchmark_group("tangency");
    g.sample_size(10);
    for id in CaseId::ALL {
        let case = catalog_case(id);
        g.bench_function(id.to_string(), |b| b.iter(|| is_tangent(&case, &rat(1, 1)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, codimension, classification, sweep, tangency);
criterion_main!(benches);
