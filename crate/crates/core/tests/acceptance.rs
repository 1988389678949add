//! Acceptance gate. Prints one line per criterion, then checks that the set
//! of failing criteria is exactly the known set recorded in the decisions
//! ledger, so a regression or an unexpected fix both break the build.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use vcinv::action::{frobenius_star, involution_star};
use vcinv::gens::{enumerate_basis, GeneratorSet};
use vcinv::groebner::{buchberger, BuchbergerOptions};
use vcinv::verify::{
    check_hilbert, check_invariance, check_kernel, check_products, check_relations, KernelOptions,
    RelationOptions, Sample, Status, VerificationReport,
};
use vcinv::{GaloisField, MonomialOrder};

/// Criteria that fail for reasons in the source material, not the code:
/// 1 (the printed delta identity is false in odd characteristic),
/// 5 and 7 (the printed module basis does not span at q = 3).
const KNOWN_FAILURES: [u32; 3] = [1, 5, 7];

fn gs(q: u32) -> GeneratorSet {
    GeneratorSet::new(&GaloisField::of_order(q).unwrap()).unwrap()
}

fn deadline(secs: u64) -> Option<Instant> {
    Some(Instant::now() + Duration::from_secs(secs))
}

fn failing(rep: &VerificationReport, filter: impl Fn(&str) -> bool) -> Vec<String> {
    rep.items
        .iter()
        .filter(|i| filter(&i.name) && matches!(i.status, Status::Fail | Status::Timeout))
        .map(|i| format!("q={} {} [{}]", rep.q, i.name, i.status.as_str()))
        .collect()
}

fn is_control(name: &str) -> bool {
    name.starts_with("control(")
}

struct Gate {
    failed: BTreeSet<u32>,
}

/// Writes past the test harness's output capture so the verdicts show up in
/// a plain `cargo test` log.
fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}

impl Gate {
    fn record(&mut self, n: u32, what: &str, problems: Vec<String>) {
        if problems.is_empty() {
            say(&format!("PASS criterion {n}: {what}"));
        } else {
            say(&format!("FAIL criterion {n}: {what}; {}", problems.join(", ")));
            self.failed.insert(n);
        }
    }
}

#[test]
fn acceptance() {
    let mut gate = Gate { failed: BTreeSet::new() };
    let relations: Vec<VerificationReport> = [2, 3, 4, 5]
        .iter()
        .map(|&q| {
            check_relations(
                &gs(q),
                &RelationOptions {
                    corrupt_t1: false,
                    deadline: deadline(120),
                },
            )
        })
        .collect();

    // 1. every identity expands to zero
    let problems = relations
        .iter()
        .flat_map(|r| failing(r, |n| !n.starts_with("divide(") && !is_control(n)))
        .collect();
    gate.record(1, "relation identities for q in {2,3,4,5}", problems);

    // 2. invariance
    let problems = [2, 3, 4, 5]
        .iter()
        .flat_map(|&q| {
            let rep = check_invariance(&gs(q), deadline(180));
            failing(&rep, move |n| q <= 4 || n.starts_with("SL2-") || n.starts_with("order"))
        })
        .collect();
    gate.record(2, "GL2 invariance (q <= 4) and SL2 invariance of h_s (q <= 5)", problems);

    // 3. exact divisibility and its negative case
    let problems = relations
        .iter()
        .flat_map(|r| failing(r, |n| n.starts_with("divide(") || n == "control(x1/x2 not divisible)"))
        .collect();
    gate.record(3, "exact divisions d0/d2, d1/d2, h_s numerators; x1/x2 rejected", problems);

    // 4. basis census
    let problems = [(2, 6), (3, 48), (4, 180), (5, 480)]
        .iter()
        .filter_map(|&(q, n)| {
            let got = enumerate_basis(q).len();
            let group = ((q * q - 1) * (q * q - q)) as usize;
            (got != n || got != group).then(|| format!("q={q}: {got} specs, |GL2| = {group}"))
        })
        .collect();
    gate.record(4, "|A|+|B|+|C| = |GL2(F_q)|", problems);

    // 5. three-way Hilbert agreement
    let hilbert = [(2, 24), (3, 16)].map(|(q, d)| check_hilbert(&gs(q), d, deadline(600)));
    let problems = hilbert.iter().flat_map(|r| failing(r, |_| true)).collect();
    gate.record(5, "Hilbert columns agree (q=2, d<=24; q=3, d<=16)", problems);

    // 6. degreewise kernel certification
    let kernels = [(2, 24), (3, 16)].map(|(q, d)| {
        check_kernel(
            &gs(q),
            d,
            &KernelOptions {
                deadline: deadline(600),
                elimination: false,
            },
        )
    });
    let problems = kernels
        .iter()
        .flat_map(|r| failing(r, |n| !is_control(n) && n != "elimination"))
        .collect();
    gate.record(6, "ker(pi)_d = I_d certified (q=2, d<=24; q=3, d<=16)", problems);

    // 7. product certificates
    let products = [
        check_products(&gs(2), Sample::All, deadline(900)),
        check_products(&gs(3), Sample::Random { n: 100, seed: 1 }, deadline(900)),
    ];
    let mut problems: Vec<String> = products.iter().flat_map(|r| failing(r, |_| true)).collect();
    let pairs = |r: &VerificationReport| r.items.iter().filter(|i| i.name.contains(" * ")).count();
    if pairs(&products[0]) != 21 || pairs(&products[1]) < 100 {
        problems.push("wrong pair count".into());
    }
    gate.record(7, "product certificates (q=2 all 21 pairs; q=3 100 seeded pairs)", problems);

    // 8. negative controls must detect the broken input
    let mut problems = Vec::new();
    let corrupted = check_relations(
        &gs(3),
        &RelationOptions {
            corrupt_t1: true,
            deadline: deadline(120),
        },
    );
    if corrupted.item("T1").map(|i| i.status) != Some(Status::Fail) {
        problems.push("corrupted T1 not rejected".to_string());
    }
    let corrupted2 = check_relations(
        &gs(2),
        &RelationOptions {
            corrupt_t1: true,
            deadline: deadline(120),
        },
    );
    if corrupted2.item("T1").map(|i| i.status) != Some(Status::Fail) {
        problems.push("corrupted T1 not rejected at q=2".to_string());
    }
    if kernels[0].item("control(drop T10)").map(|i| i.status) != Some(Status::Pass) {
        problems.push("dropping T10 left the dimensions unchanged".to_string());
    }
    gate.record(8, "corrupted T1 fails; dropping T10 changes a dimension", problems);

    // 9. property checks
    let mut problems = Vec::new();
    for q in [2, 3, 4, 5, 7, 8, 9] {
        let f = GaloisField::of_order(q).unwrap();
        for a in 0..q as u8 {
            if f.pow(a, q as u64) != a || (a != 0 && f.mul(a, f.inv(a).unwrap()) != 1) {
                problems.push(format!("GF({q}) element {a}"));
            }
        }
    }
    for q in [2, 3, 4, 5] {
        let g = gs(q);
        let star = |p| involution_star(p).unwrap();
        if star(&g.um1) != g.u1 || star(&g.u1) != g.um1 || star(&star(&g.u0)) != g.u0 {
            problems.push(format!("q={q}: involution does not swap u-1, u1"));
        }
        let d = &g.dickson;
        let t0 = &d.c0 * &g.u0 - &d.c1 * &g.u1;
        let t1 = &d.c0 * &g.um1 - &d.c1 * &g.u0.pow(q);
        let u2 = g.u(2);
        // F*(c0*u0 - c1*u1 + u2) = c0*u-1 - c1*u0^q + u1^q, compared term by term
        if frobenius_star(&t0).unwrap() != t1 || frobenius_star(&u2).unwrap() != g.u1.pow(q) {
            problems.push(format!("q={q}: F* does not carry T0 to T1"));
        }
    }
    for q in [2, 3] {
        let field = GaloisField::of_order(q).unwrap();
        let counts = |order| {
            let g = GeneratorSet::with_order(&field, order).unwrap();
            let gb = buchberger(&g.ideal(), order, &BuchbergerOptions::default()).unwrap();
            (0..=24).map(|d| gb.hilbert_function_quotient(d).unwrap()).collect::<Vec<_>>()
        };
        if counts(MonomialOrder::GRevLex) != counts(MonomialOrder::GLex) {
            problems.push(format!("q={q}: Hilbert counts depend on the order"));
        }
    }
    gate.record(9, "field axioms, involution, Frobenius T0 -> T1, order independence", problems);

    let known: BTreeSet<u32> = KNOWN_FAILURES.into_iter().collect();
    say(&format!("failing criteria: {:?} (known: {:?})", gate.failed, known));
    assert_eq!(gate.failed, known, "acceptance outcome changed");
}
