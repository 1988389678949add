use criterion::{black_box, criterion_group, criterion_main, Criterion};

use vcinv::action::{gl2_generators, invariant_dimension};
use vcinv::gens::{BasisElementSpec, GeneratorSet};
use vcinv::groebner::{buchberger, BuchbergerOptions};
use vcinv::verify::{check_relations, reduce_product, ProductContext, RelationOptions};
use vcinv::{GaloisField, MonomialOrder};

fn gs(q: u32) -> GeneratorSet {
    GeneratorSet::new(&GaloisField::of_order(q).unwrap()).unwrap()
}

fn field(c: &mut Criterion) {
    let f = GaloisField::of_order(9).unwrap();
    c.bench_function("gf9 mul table sweep", |b| {
        b.iter(|| {
            let mut acc = 0u8;
            for x in 0..9 {
                for y in 0..9 {
                    acc = f.add(acc, f.mul(x, y));
                }
            }
            black_box(acc)
        })
    });
}

fn polynomials(c: &mut Criterion) {
    let g = gs(5);
    c.bench_function("q5 d2 * d2s", |b| b.iter(|| black_box(&g.dickson.d2 * &g.dickson.d2s)));
    c.bench_function("q5 make_h(2)", |b| b.iter(|| black_box(g.make_h(2).unwrap())));
    c.bench_function("q5 relation suite", |b| {
        b.iter(|| black_box(check_relations(&g, &RelationOptions::default())))
    });
}

fn groebner(c: &mut Criterion) {
    let g = gs(3);
    c.bench_function("q3 GB(I) grevlex", |b| {
        b.iter(|| black_box(buchberger(&g.ideal(), MonomialOrder::GRevLex, &BuchbergerOptions::default()).unwrap()))
    });
    let gl = GeneratorSet::with_order(&g.field, MonomialOrder::GLex).unwrap();
    c.bench_function("q3 GB(I) glex", |b| {
        b.iter(|| black_box(buchberger(&gl.ideal(), MonomialOrder::GLex, &BuchbergerOptions::default()).unwrap()))
    });
}

fn invariants(c: &mut Criterion) {
    let f = GaloisField::of_order(3).unwrap();
    let group = gl2_generators(&f);
    c.bench_function("q3 invariant dimension d=16", |b| {
        b.iter(|| black_box(invariant_dimension(&f, &group, 16)))
    });
}

fn products(c: &mut Criterion) {
    let g = gs(3);
    c.bench_function("q3 reduce C:1,0,0 * B:0,0,1,0", |b| {
        b.iter(|| {
            let mut ctx = ProductContext::new(&g, None, None).unwrap();
            black_box(
                reduce_product(
                    &mut ctx,
                    BasisElementSpec::C { s: 1, k: 0, t: 0 },
                    BasisElementSpec::B { i: 0, j: 0, k: 1, t: 0 },
                )
                .unwrap(),
            )
        })
    });
}

criterion_group!(benches, field, polynomials, groebner, invariants, products);
criterion_main!(benches);
