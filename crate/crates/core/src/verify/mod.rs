//! Check suites. Each suite returns a [`VerificationReport`] whose items are
//! individual exact checks; negative controls are items that pass when the
//! deliberately broken input is detected.

mod hilbert;
mod products;

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::action::{self, enumerate_gl2, enumerate_sl2, find_moving};
use crate::gens::{self, GeneratorSet, Relation, C0, C0S, C1, C1S, U0, U1, UM1};
use crate::mpoly::{PolyError, Polynomial, Ring};

pub use hilbert::{
    check_hilbert, check_kernel, elimination_experiment, hilbert_columns, series_coefficients, HilbertColumns,
    KernelOptions,
};
pub use products::{
    basis_span_gap, check_products, reduce_product, verify_certificate, CertificateCheck, ProductContext, ReductionCertificate,
    Sample, VerifyError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub status: Status,
    pub detail: String,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub suite: String,
    pub q: u32,
    pub params: Map<String, Value>,
    pub items: Vec<CheckItem>,
}

impl VerificationReport {
    pub fn new(suite: &str, q: u32) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            q,
            params: Map::new(),
            items: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    /// Fail if any item failed, else timeout if any timed out, else pass.
    pub fn overall(&self) -> Status {
        if self.items.iter().any(|i| i.status == Status::Fail) {
            Status::Fail
        } else if self.items.iter().any(|i| i.status == Status::Timeout) {
            Status::Timeout
        } else {
            Status::Pass
        }
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }

    /// Items whose name starts with `prefix`.
    pub fn items_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckItem> + 'a {
        self.items.iter().filter(move |i| i.name.starts_with(prefix))
    }

    /// The deterministic part and, under `volatile`, per-item timings.
    pub fn to_json(&self) -> Value {
        let items: Vec<Value> = self
            .items
            .iter()
            .map(|i| json!({"name": i.name, "status": i.status, "detail": i.detail}))
            .collect();
        let timings: Map<String, Value> = self
            .items
            .iter()
            .map(|i| (i.name.clone(), json!(i.elapsed_ms as u64)))
            .collect();
        json!({
            "suite": self.suite,
            "q": self.q,
            "params": self.params,
            "items": items,
            "overall": self.overall(),
            "volatile": {"timings": timings, "version": env!("CARGO_PKG_VERSION")},
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("suite {} (q = {})\n", self.suite, self.q);
        for i in &self.items {
            let _ = writeln!(out, "{:<7} {}: {}", i.status.as_str().to_uppercase(), i.name, i.detail);
        }
        let _ = writeln!(out, "overall: {}", self.overall().as_str());
        out
    }
}

/// Appends items while honouring a deadline.
pub(crate) struct Runner {
    pub report: VerificationReport,
    deadline: Option<Instant>,
}

impl Runner {
    pub fn new(suite: &str, q: u32, deadline: Option<Instant>) -> Self {
        Runner {
            report: VerificationReport::new(suite, q),
            deadline,
        }
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() > d)
    }


    pub fn run(&mut self, name: impl Into<String>, check: impl FnOnce() -> (Status, String)) {
        let name = name.into();
        if self.expired() {
            self.push(name, Status::Timeout, "time budget exhausted before this check".into(), 0);
            return;
        }
        let start = Instant::now();
        let (status, detail) = check();
        self.push(name, status, detail, start.elapsed().as_millis());
    }

    pub fn push(&mut self, name: String, status: Status, detail: String, elapsed_ms: u128) {
        self.report.items.push(CheckItem {
            name,
            status,
            detail,
            elapsed_ms,
        });
    }

    pub fn finish(self) -> VerificationReport {
        self.report
    }
}

/// Pass iff `diff` is the zero polynomial; otherwise the difference is the payload.
pub(crate) fn zero_check(diff: &Polynomial) -> (Status, String) {
    if diff.is_zero() {
        (Status::Pass, "expands to 0".into())
    } else {
        (Status::Fail, format!("nonzero difference ({} terms): {diff}", diff.len()))
    }
}

fn equal_check(lhs: &Polynomial, rhs: &Polynomial) -> (Status, String) {
    zero_check(&(lhs - rhs))
}

/// `T1` with the sign of `U1^q` flipped; in characteristic 2, where the flip
/// is invisible, the term is dropped instead.
pub fn corrupted_t1(s7: &Ring) -> Polynomial {
    let q = s7.field().q();
    let v = |i| s7.var(i);
    let base = v(C0) * v(UM1) - v(C1) * v(U0).pow(q);
    if s7.field().p() == 2 {
        base
    } else {
        base - v(U1).pow(q)
    }
}

/// The S7 involution `C0 <-> C0s`, `C1 <-> C1s`, `Um1 <-> U1`.
pub fn involution_s7(f: &Polynomial) -> Polynomial {
    f.map_monomials(f.ring(), |e| {
        let mut out = *e;
        out.swap(C0, C0S);
        out.swap(C1, C1S);
        out.swap(UM1, U1);
        out
    })
}

#[derive(Debug, Clone, Default)]
pub struct RelationOptions {
    /// Use the sign-corrupted `T1` in the `T1` item.
    pub corrupt_t1: bool,
    pub deadline: Option<Instant>,
}

/// Exact expansion of every identity among the generators.
pub fn check_relations(gs: &GeneratorSet, opts: &RelationOptions) -> VerificationReport {
    let q = gs.q();
    let mut r = Runner::new("relations", q, opts.deadline);
    r.report.param("corrupt_t1", opts.corrupt_t1);
    let d = &gs.dickson;
    let (um1, u0, u1) = (&gs.um1, &gs.u0, &gs.u1);
    let u2 = gs.u(2);
    let h: Vec<Result<Polynomial, gens::GenError>> = (0..q).map(|s| gs.make_h(s)).collect();
    let h_ok = |s: u32| h[s as usize].clone().map_err(|e| e.to_string());
    let pi_relation = |p: &Polynomial| -> (Status, String) {
        match gs.pi(p) {
            Ok(v) => zero_check(&v),
            Err(e) => (Status::Fail, e.to_string()),
        }
    };
    let ab = um1 * u1;
    let w = u0.pow(q + 1);

    r.run("T0", || zero_check(&(&d.c0 * u0 - &d.c1 * u1 + &u2)));
    let t1 = if opts.corrupt_t1 {
        corrupted_t1(&gs.s7)
    } else {
        gs.relation(Relation::T1)
    };
    r.run("T1", || pi_relation(&t1));
    r.run("T1s", || pi_relation(&gs.relation(Relation::T1s)));
    r.run("K00", || equal_check(&gs.k00(), &(&ab - &w)));
    r.run("T00", || pi_relation(&gs.relation(Relation::T00)));
    for s in 0..q - 1 {
        r.run(format!("Rs({s})"), || match (h_ok(s), h_ok(s + 1)) {
            (Ok(hs), Ok(hs1)) => equal_check(
                &(&hs * u1),
                &(u0 * um1.pow(q - 1 - s) * d.d2.pow(s) + &d.d2s * &hs1),
            ),
            (Err(e), _) | (_, Err(e)) => (Status::Fail, e),
        });
    }
    for s in 1..q {
        r.run(format!("Ks({s})"), || match h_ok(s) {
            Ok(hs) => {
                let tail = gens::binomial_tail(s, &ab, &w);
                equal_check(&(hs * d.d2s.pow(s)), &(&d.c1s * u1.pow(s) + um1.pow(q - s) * u0 * tail))
            }
            Err(e) => (Status::Fail, e),
        });
    }
    for s in 1..q {
        r.run(format!("Kss({s})"), || match h_ok(q - 1 - s) {
            Ok(h) => {
                let tail = gens::binomial_tail(s, &ab, &w);
                equal_check(&(h * d.d2.pow(s)), &(&d.c1 * um1.pow(s) + u0 * u1.pow(q - s) * tail))
            }
            Err(e) => (Status::Fail, e),
        });
    }
    r.run("T10", || pi_relation(&gs.relation(Relation::T10)));
    r.run("T01", || pi_relation(&gs.relation(Relation::T01)));
    for s in 1..q {
        r.run(format!("hs_d2s_power({s})"), || match h_ok(s) {
            Ok(hs) => equal_check(
                &(u0.pow(q) * hs * d.d2s.pow(s)),
                &(&d.c0s * u1.pow(s + 1) + um1.pow(q - s) * gs.k00().pow(s)),
            ),
            Err(e) => (Status::Fail, e),
        });
    }
    let lhs_delta = um1.pow(q - 1) * u0 * u1.pow(q - 2);
    let rest = &d.c1 * &d.c0s - &d.c1s * u1.pow(q - 1);
    r.run("delta", || {
        let (delta, big) = gs.make_delta();
        let (status, detail) = equal_check(&lhs_delta, &(&rest - &(um1 * u0 * &delta)));
        match gs.pi(&big) {
            Ok(v) if v == delta => (status, detail),
            Ok(_) => (Status::Fail, "pi(Delta) differs from delta".into()),
            Err(e) => (Status::Fail, e.to_string()),
        }
    });
    r.run("delta_corrected", || {
        let (delta, _) = gs.make_delta_corrected();
        equal_check(&lhs_delta, &(&rest - &(um1 * u0 * &delta)))
    });

    r.run("frobenius(T0 -> T1)", || frobenius_derivation(gs, &u2));
    r.run("involution(T1 -> T1s, T10 -> T01)", || involution_derivation(gs));

    r.run("divide(d0/d2)", || division_check(&d.d0, &d.d2, &d.c0));
    r.run("divide(d1/d2)", || division_check(&d.d1, &d.d2, &d.c1));
    r.run("divide(c0 = d2^(q-1))", || equal_check(&d.c0, &d.d2.pow(q - 1)));
    for s in 0..q {
        r.run(format!("divide(h({s}))"), || match h_ok(s) {
            Ok(hs) => {
                let num = u1.pow(s + 1) * d.d2s.pow(q - 1 - s) + um1.pow(q - s) * d.d2.pow(s);
                equal_check(&(hs * u0.pow(q)), &num)
            }
            Err(e) => (Status::Fail, e),
        });
    }
    r.run("control(x1/x2 not divisible)", || {
        match gs.r4.var(0).divide_exact(&gs.r4.var(1)) {
            Err(PolyError::NotDivisible) => (Status::Pass, "NotDivisible reported".into()),
            Err(e) => (Status::Fail, format!("unexpected error {e}")),
            Ok(p) => (Status::Fail, format!("division wrongly succeeded with {p}")),
        }
    });
    r.run("control(T1 sign flip)", || {
        let corrupted = corrupted_t1(&gs.s7);
        match gs.pi(&corrupted) {
            Ok(v) if !v.is_zero() => (Status::Pass, format!("detected: pi(corrupted T1) has {} terms", v.len())),
            Ok(_) => (Status::Fail, "corrupted relation still vanishes".into()),
            Err(e) => (Status::Fail, e.to_string()),
        }
    });
    r.finish()
}

fn division_check(num: &Polynomial, den: &Polynomial, expected: &Polynomial) -> (Status, String) {
    match num.divide_exact(den) {
        Ok(quot) => equal_check(&quot, expected),
        Err(e) => (Status::Fail, e.to_string()),
    }
}

/// `F*` sends each ingredient of (T0) to the matching ingredient of (T1):
/// `c0, c1` fixed, `u0 -> u-1`, `u1 -> u0^q`, `u2 -> u1^q`.
fn frobenius_derivation(gs: &GeneratorSet, u2: &Polynomial) -> (Status, String) {
    let q = gs.q();
    let d = &gs.dickson;
    let pairs = [
        ("c0", &d.c0, d.c0.clone()),
        ("c1", &d.c1, d.c1.clone()),
        ("u0", &gs.u0, gs.um1.clone()),
        ("u1", &gs.u1, gs.u0.pow(q)),
        ("u2", u2, gs.u1.pow(q)),
    ];
    for (name, src, target) in pairs {
        match action::frobenius_star(src) {
            Ok(img) if img == target => {}
            Ok(img) => return (Status::Fail, format!("F*({name}) - expected = {}", img - target)),
            Err(e) => return (Status::Fail, e.to_string()),
        }
    }
    (Status::Pass, "F* maps c0, c1, u0, u1, u2 to c0, c1, u-1, u0^q, u1^q".into())
}

/// `*` sends the ingredients of (T1) to those of (T1s), and the S7
/// involution sends the pullbacks T1 -> T1s and T10 -> T01.
fn involution_derivation(gs: &GeneratorSet) -> (Status, String) {
    let d = &gs.dickson;
    let pairs = [
        ("c0", &d.c0, &d.c0s),
        ("c1", &d.c1, &d.c1s),
        ("u-1", &gs.um1, &gs.u1),
        ("u0", &gs.u0, &gs.u0),
        ("d2", &d.d2, &d.d2s),
    ];
    for (name, src, target) in pairs {
        match action::involution_star(src) {
            Ok(img) if &img == target => {}
            Ok(img) => return (Status::Fail, format!("({name})* - expected = {}", img - target)),
            Err(e) => return (Status::Fail, e.to_string()),
        }
    }
    for (a, b) in [(Relation::T1, Relation::T1s), (Relation::T10, Relation::T01), (Relation::T00, Relation::T00)] {
        let img = involution_s7(&gs.relation(a));
        let target = gs.relation(b);
        if img != target {
            return (Status::Fail, format!("({})* - {} = {}", a.name(), b.name(), img - target));
        }
    }
    (Status::Pass, "generators and S7 relations correspond under *".into())
}

/// Invariance of the generators under the full groups.
pub fn check_invariance(gs: &GeneratorSet, deadline: Option<Instant>) -> VerificationReport {
    let q = gs.q();
    let mut r = Runner::new("invariance", q, deadline);
    let gl = enumerate_gl2(&gs.field);
    let sl = enumerate_sl2(&gs.field);
    r.run("order(GL2)", || count_check(gl.len(), ((q * q - 1) * (q * q - q)) as usize));
    r.run("order(SL2)", || count_check(sl.len(), (q * (q * q - 1)) as usize));
    let fixed = |f: &Polynomial, group: &[action::GroupElement]| -> (Status, String) {
        match find_moving(f, group) {
            Ok(None) => (Status::Pass, format!("fixed by all {} elements", group.len())),
            Ok(Some((g, diff))) => (Status::Fail, format!("moved by {g}: g.f - f = {diff}")),
            Err(e) => (Status::Fail, e.to_string()),
        }
    };
    for (name, f) in gs.named_generators() {
        r.run(format!("GL2-invariant({name})"), || fixed(&f, &gl));
    }
    r.run("GL2-invariant(d2*d2s)", || fixed(&gs.k00(), &gl));
    for s in 0..q {
        r.run(format!("SL2-invariant(h({s}))"), || match gs.make_h(s) {
            Ok(h) => fixed(&h, &sl),
            Err(e) => (Status::Fail, e.to_string()),
        });
    }
    r.run("SL2-invariant(d2)", || fixed(&gs.dickson.d2, &sl));
    if q > 2 {
        r.run("control(d2 moved by GL2)", || match find_moving(&gs.dickson.d2, &gl) {
            Ok(Some((g, diff))) => (Status::Pass, format!("moved by {g}: g.d2 - d2 = {diff}")),
            Ok(None) => (Status::Fail, "d2 unexpectedly GL2-invariant".into()),
            Err(e) => (Status::Fail, e.to_string()),
        });
    } else {
        r.run("GL2-invariant(d2) over GF(2)", || fixed(&gs.dickson.d2, &gl));
    }
    r.finish()
}

pub(crate) fn count_check(got: usize, expected: usize) -> (Status, String) {
    if got == expected {
        (Status::Pass, format!("{got}"))
    } else {
        (Status::Fail, format!("got {got}, expected {expected}"))
    }
}
