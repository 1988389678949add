use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde_json::{json, Value};
use thiserror::Error;

use crate::gens::{enumerate_basis, BasisElement, BasisElementSpec, GenError, GeneratorSet, Relation, C0, C0S, C1, C1S, U0, U1, UM1};
use crate::groebner::{buchberger, BuchbergerOptions, GroebnerBasis, GroebnerError};
use crate::linalg::{Echelon, SparseVec};
use crate::mpoly::{Monomial, MonomialOrder, Polynomial};

use super::{Runner, Status, VerificationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error("NotExpressible: {0} is not an N-combination of the basis modulo I")]
    NotExpressible(String),
    #[error("inconsistent reduction: {0}")]
    Inconsistent(String),
    #[error("malformed certificate: {0}")]
    BadCertificate(String),
}

/// `f * g = ell + Σ cofactor_i * I_i` with `ell = Σ coefficient_b * b` and
/// every coefficient a polynomial in `C0, C1, C0s, C1s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCertificate {
    pub factors: (BasisElementSpec, BasisElementSpec),
    pub degree: u32,
    pub ell: Vec<(BasisElementSpec, Polynomial)>,
    pub cofactors: Vec<Polynomial>,
}

/// The N-span of the basis in one degree of `S7 / I`, in normal-form
/// coordinates.
struct DegreeSpan {
    echelon: Echelon,
    index: FxHashMap<Monomial, u32>,
    columns: Vec<(Monomial, BasisElementSpec)>,
}

impl DegreeSpan {
    fn coordinates(&mut self, nf: &Polynomial) -> SparseVec {
        let mut v: SparseVec = nf
            .terms()
            .iter()
            .map(|t| {
                let next = self.index.len() as u32;
                (*self.index.entry(t.mono).or_insert(next), t.coeff)
            })
            .collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }
}

/// Shared state for a run of product reductions: a cofactor-tracking basis
/// of `I` and cached spans per degree.
pub struct ProductContext {
    gs: GeneratorSet,
    gb: GroebnerBasis,
    elements: FxHashMap<BasisElementSpec, BasisElement>,
    spans: FxHashMap<u32, DegreeSpan>,
}

impl ProductContext {
    /// Bound defaults to twice the largest basis degree.
    pub fn new(gs: &GeneratorSet, bound: Option<u32>, deadline: Option<Instant>) -> Result<Self, VerifyError> {
        let q = gs.q();
        let max = enumerate_basis(q).iter().map(|s| s.degree(q)).max().unwrap_or(0);
        let gb = buchberger(
            &gs.ideal(),
            MonomialOrder::GRevLex,
            &BuchbergerOptions {
                degree_bound: Some(bound.unwrap_or(2 * max)),
                deadline,
                track_cofactors: true,
            },
        )?;
        Ok(ProductContext {
            gs: gs.clone(),
            gb,
            elements: FxHashMap::default(),
            spans: FxHashMap::default(),
        })
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gs
    }

    pub fn basis(&self) -> &GroebnerBasis {
        &self.gb
    }

    fn element(&mut self, spec: BasisElementSpec) -> Result<BasisElement, VerifyError> {
        if let Some(e) = self.elements.get(&spec) {
            return Ok(e.clone());
        }
        let e = self.gs.basis_element(spec)?;
        self.elements.insert(spec, e.clone());
        Ok(e)
    }

    fn span(&mut self, d: u32) -> Result<&mut DegreeSpan, VerifyError> {
        if !self.spans.contains_key(&d) {
            let q = self.gs.q();
            let mut span = DegreeSpan {
                echelon: Echelon::new(&self.gs.field, true),
                index: FxHashMap::default(),
                columns: Vec::new(),
            };
            for spec in enumerate_basis(q) {
                let db = spec.degree(q);
                if db > d {
                    continue;
                }
                let b = self.element(spec)?;
                for m in self.gs.s7.monomials_of_degree_in(d - db, &[C0, C1, C0S, C1S]) {
                    let nf = self.gb.normal_form(&b.pullback.mul_term(1, &m))?;
                    let v = span.coordinates(&nf);
                    let id = span.columns.len() as u32;
                    span.columns.push((m, spec));
                    span.echelon.insert(v, id);
                }
            }
            self.spans.insert(d, span);
        }
        Ok(self.spans.get_mut(&d).unwrap())
    }
}

/// A monomial of weighted degree `d` whose class modulo `I` lies outside the
/// N-span of the basis pullbacks, if any. `gb` must be a basis of `I`
/// valid through degree `d`.
pub fn basis_span_gap(gs: &GeneratorSet, gb: &GroebnerBasis, d: u32) -> Result<Option<Polynomial>, VerifyError> {
    let q = gs.q();
    let mut span = DegreeSpan {
        echelon: Echelon::new(&gs.field, false),
        index: FxHashMap::default(),
        columns: Vec::new(),
    };
    for spec in enumerate_basis(q) {
        let db = spec.degree(q);
        if db > d {
            continue;
        }
        let b = gs.basis_element(spec)?;
        for m in gs.s7.monomials_of_degree_in(d - db, &[C0, C1, C0S, C1S]) {
            let v = span.coordinates(&gb.normal_form(&b.pullback.mul_term(1, &m))?);
            span.echelon.insert(v, 0);
        }
    }
    for m in gs.s7.monomials_of_degree_in(d, &[C0, C1, C0S, C1S, UM1, U0, U1]) {
        let nf = gb.normal_form(&gs.s7.term(1, m))?;
        if nf.is_zero() {
            continue;
        }
        let v = span.coordinates(&nf);
        if !span.echelon.contains(v) {
            return Ok(Some(gs.s7.term(1, m)));
        }
    }
    Ok(None)
}

/// Builds the certificate for `f * g`: normal form of the product modulo
/// `I`, exact linear algebra for its N-coordinates in the basis, and the
/// ideal cofactors of `f * g - ell`.
pub fn reduce_product(
    ctx: &mut ProductContext,
    f: BasisElementSpec,
    g: BasisElementSpec,
) -> Result<ReductionCertificate, VerifyError> {
    let fe = ctx.element(f)?;
    let ge = ctx.element(g)?;
    let d = fe.degree + ge.degree;
    if let Some(bound) = ctx.gb.degree_bound() {
        if d > bound {
            return Err(GroebnerError::DegreeBoundExceeded { degree: d, bound }.into());
        }
    }
    let product = &fe.pullback * &ge.pullback;
    let nf = ctx.gb.normal_form(&product)?;
    let s7 = ctx.gs.s7.clone();
    let span = ctx.span(d)?;
    let target = span.coordinates(&nf);
    let combo = span
        .echelon
        .express(target)
        .ok_or_else(|| VerifyError::NotExpressible(format!("{f} * {g}")))?;
    let mut coeffs: BTreeMap<BasisElementSpec, Vec<crate::mpoly::Term>> = BTreeMap::new();
    for (id, c) in combo {
        let (m, spec) = span.columns[id as usize];
        coeffs.entry(spec).or_default().push(crate::mpoly::Term { mono: m, coeff: c });
    }
    let ell: Vec<(BasisElementSpec, Polynomial)> = coeffs
        .into_iter()
        .map(|(spec, terms)| (spec, Polynomial::from_terms(&s7, terms)))
        .collect();
    let mut ell_poly = s7.zero();
    for (spec, c) in &ell {
        let b = ctx.element(*spec)?;
        ell_poly = ell_poly + c * &b.pullback;
    }
    let (rem, cofactors) = ctx.gb.normal_form_with_cofactors(&(&product - &ell_poly))?;
    if !rem.is_zero() {
        return Err(VerifyError::Inconsistent(format!("{f} * {g} - ell has normal form {rem}")));
    }
    Ok(ReductionCertificate {
        factors: (f, g),
        degree: d,
        ell,
        cofactors,
    })
}

/// Outcome of re-checking a certificate by plain expansion.
#[derive(Debug, Clone)]
pub struct CertificateCheck {
    /// Every ell coefficient involves only `C0, C1, C0s, C1s`.
    pub coefficients_in_n: bool,
    /// `f*g - ell - Σ cofactor_i * I_i` in S7.
    pub s7_residual: Polynomial,
    /// `value(f)*value(g) - Σ pi(coefficient_b) * value(b)` in R4.
    pub r4_residual: Polynomial,
}

impl CertificateCheck {
    pub fn verified(&self) -> bool {
        self.coefficients_in_n && self.s7_residual.is_zero() && self.r4_residual.is_zero()
    }
}

/// Re-verifies a certificate from scratch: rebuilds the factors and the
/// relations and expands both identities.
pub fn verify_certificate(gs: &GeneratorSet, cert: &ReductionCertificate) -> Result<CertificateCheck, VerifyError> {
    let f = gs.basis_element(cert.factors.0)?;
    let g = gs.basis_element(cert.factors.1)?;
    let ideal = gs.ideal();
    if cert.cofactors.len() != ideal.len() {
        return Err(VerifyError::BadCertificate(format!("{} cofactors", cert.cofactors.len())));
    }
    let n_vars = [C0, C1, C0S, C1S];
    let coefficients_in_n = cert
        .ell
        .iter()
        .all(|(_, c)| c.support_vars().iter().all(|v| n_vars.contains(v)));
    let mut s7_residual = &f.pullback * &g.pullback;
    let mut r4_residual = &f.value * &g.value;
    for (spec, c) in &cert.ell {
        let b = gs.basis_element(*spec)?;
        s7_residual = s7_residual - c * &b.pullback;
        r4_residual = r4_residual - gs.pi(c)? * &b.value;
    }
    for (cof, rel) in cert.cofactors.iter().zip(&ideal) {
        s7_residual = s7_residual - cof * rel;
    }
    Ok(CertificateCheck {
        coefficients_in_n,
        s7_residual,
        r4_residual,
    })
}

impl ReductionCertificate {
    pub fn to_json(&self, gs: &GeneratorSet, verified: bool) -> Value {
        let field = &gs.field;
        let ell: Vec<Value> = self
            .ell
            .iter()
            .map(|(spec, c)| json!({"basis": spec.to_string(), "coefficient": c.to_string()}))
            .collect();
        let generators: Vec<Value> = Relation::ALL
            .iter()
            .map(|r| json!({"name": r.name(), "polynomial": gs.relation(*r).to_string()}))
            .collect();
        json!({
            "field": {
                "p": field.p(),
                "s": field.s(),
                "q": field.q(),
                "modulus": field.modulus_text(),
            },
            "variables": gs.s7.names(),
            "weights": gs.s7.weights(),
            "factors": [self.factors.0.to_string(), self.factors.1.to_string()],
            "degree": self.degree,
            "ell": ell,
            "generators": generators,
            "cofactors": self.cofactors.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "verified": verified,
        })
    }

    /// Reads back the output of [`ReductionCertificate::to_json`].
    pub fn from_json(gs: &GeneratorSet, v: &Value) -> Result<Self, VerifyError> {
        let bad = |what: &str| VerifyError::BadCertificate(what.to_string());
        let text = |v: &Value, what: &str| v.as_str().map(str::to_string).ok_or_else(|| bad(what));
        let spec = |v: &Value| -> Result<BasisElementSpec, VerifyError> { Ok(text(v, "basis")?.parse()?) };
        let poly = |v: &Value, what: &str| -> Result<Polynomial, VerifyError> {
            gs.s7.parse(&text(v, what)?).map_err(|e| VerifyError::BadCertificate(format!("{what}: {e}")))
        };
        if v["field"]["q"].as_u64() != Some(gs.q() as u64) || v["field"]["modulus"].as_str() != Some(&gs.field.modulus_text()) {
            return Err(bad("field does not match"));
        }
        let factors = v["factors"].as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("factors"))?;
        let factors = (spec(&factors[0])?, spec(&factors[1])?);
        let ell = v["ell"]
            .as_array()
            .ok_or_else(|| bad("ell"))?
            .iter()
            .map(|e| Ok((spec(&e["basis"])?, poly(&e["coefficient"], "coefficient")?)))
            .collect::<Result<Vec<_>, VerifyError>>()?;
        let cofactors = v["cofactors"]
            .as_array()
            .ok_or_else(|| bad("cofactors"))?
            .iter()
            .map(|c| poly(c, "cofactor"))
            .collect::<Result<Vec<_>, _>>()?;
        let degree = v["degree"].as_u64().ok_or_else(|| bad("degree"))? as u32;
        Ok(ReductionCertificate {
            factors,
            degree,
            ell,
            cofactors,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    All,
    Random { n: usize, seed: u64 },
}

/// Unordered pairs `(i, j)`, `i <= j`, of basis indices selected by `sample`.
fn select_pairs(count: usize, sample: Sample) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = (0..count).flat_map(|i| (i..count).map(move |j| (i, j))).collect();
    match sample {
        Sample::All => all,
        Sample::Random { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = rand::seq::index::sample(&mut rng, all.len(), n.min(all.len())).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|k| all[k]).collect()
        }
    }
}

/// Splits `a + b = m * l + r` with `l ∈ {0, 1}` and `r < m`.
fn carry(sum: u32, m: u32) -> (u32, u32) {
    if sum >= m {
        (1, sum - m)
    } else {
        (0, sum)
    }
}

/// Product certificates for the selected pairs plus the congruences the
/// reduction argument rests on.
pub fn check_products(gs: &GeneratorSet, sample: Sample, deadline: Option<Instant>) -> VerificationReport {
    let q = gs.q();
    let mut r = Runner::new("products", q, deadline);
    match sample {
        Sample::All => r.report.param("sample", "all"),
        Sample::Random { n, seed } => {
            r.report.param("sample", n);
            r.report.param("seed", seed);
        }
    }
    let mut ctx = match ProductContext::new(gs, None, deadline) {
        Ok(c) => c,
        Err(VerifyError::Groebner(GroebnerError::Timeout)) => {
            r.push("setup".into(), Status::Timeout, "time budget exhausted".into(), 0);
            return r.finish();
        }
        Err(e) => {
            r.push("setup".into(), Status::Fail, e.to_string(), 0);
            return r.finish();
        }
    };
    let specs = enumerate_basis(q);
    let pairs = select_pairs(specs.len(), sample);
    r.report.param("pairs", pairs.len());
    for (i, j) in pairs {
        let (f, g) = (specs[i], specs[j]);
        r.run(format!("{f} * {g}"), || match reduce_product(&mut ctx, f, g) {
            Ok(cert) => match verify_certificate(gs, &cert) {
                Ok(check) if check.verified() => {
                    let cof_terms: usize = cert.cofactors.iter().map(|c| c.len()).sum();
                    (
                        Status::Pass,
                        format!("ell over {} basis elements, {} cofactor terms", cert.ell.len(), cof_terms),
                    )
                }
                Ok(check) => (
                    Status::Fail,
                    format!(
                        "re-verification failed: N-only {}, S7 residual {}, R4 residual {}",
                        check.coefficients_in_n, check.s7_residual, check.r4_residual
                    ),
                ),
                Err(e) => (Status::Fail, e.to_string()),
            },
            Err(VerifyError::Groebner(GroebnerError::Timeout)) => (Status::Timeout, "time budget exhausted".into()),
            Err(e) => (Status::Fail, e.to_string()),
        });
    }

    let gb = ctx.basis().clone();
    let member = |name: &str, diff: &Polynomial| -> Result<(), String> {
        match gb.normal_form(diff) {
            Ok(nf) if nf.is_zero() => Ok(()),
            Ok(nf) => Err(format!("{name}: normal form {nf}")),
            Err(e) => Err(format!("{name}: {e}")),
        }
    };
    let s7 = &gs.s7;
    let v = |i| s7.var(i);
    let elem = |spec: BasisElementSpec| gs.basis_element(spec).map(|e| e.pullback);

    r.run("exponent decomposition (A x A)", || {
        for i1 in 0..q {
            for i2 in 0..q {
                let (l, r3) = carry(i1 + i2, q);
                if q * l + r3 != i1 + i2 || (l == 1 && r3 > q - 2) || r3 > q - 1 {
                    return (Status::Fail, format!("i = {i1} + {i2}"));
                }
            }
        }
        for t1 in 0..q - 1 {
            for t2 in 0..q - 1 {
                let (l, t3) = carry(t1 + t2, q - 1);
                if (q - 1) * l + t3 != t1 + t2 || t3 > q - 2 || (l == 1 && q >= 3 && t3 > q - 3) {
                    return (Status::Fail, format!("t = {t1} + {t2}"));
                }
            }
        }
        (Status::Pass, "all index sums split with the stated ranges".into())
    });

    r.run("A x A power reduction", || {
        let um1_q = v(C1S) * v(U0).pow(q) - v(C0S) * v(U1);
        let u1_q = v(C1) * v(U0).pow(q) - v(C0) * v(UM1);
        let c00 = v(C0) * v(C0S);
        let a_specs: Vec<_> = specs.iter().filter(|s| s.family() == 'A').copied().collect();
        let mut checked = 0;
        for (n, &sa) in a_specs.iter().enumerate() {
            for &sb in &a_specs[n..] {
                let (BasisElementSpec::A { i: i1, j: j1, t: t1 }, BasisElementSpec::A { i: i2, j: j2, t: t2 }) = (sa, sb)
                else {
                    unreachable!()
                };
                let (li, i3) = carry(i1 + i2, q);
                let (lj, j3) = carry(j1 + j2, q);
                let (lt, t3) = carry(t1 + t2, q - 1);
                let lhs = match (elem(sa), elem(sb)) {
                    (Ok(a), Ok(b)) => a * b,
                    (Err(e), _) | (_, Err(e)) => return (Status::Fail, e.to_string()),
                };
                let x3 = v(UM1).pow(i3) * v(U1).pow(j3) * gs.k_s7().pow(t3);
                let rhs = um1_q.pow(li) * u1_q.pow(lj) * c00.pow(lt) * x3;
                if let Err(e) = member(&format!("{sa} * {sb}"), &(lhs - rhs)) {
                    return (Status::Fail, e);
                }
                checked += 1;
            }
        }
        (Status::Pass, format!("{checked} pairs congruent modulo I"))
    });

    if q >= 3 {
        r.run("Um1^(q-1)*U0 = C1s*U1 - z(1,0,0)", || {
            match elem(BasisElementSpec::C { s: 1, k: 0, t: 0 }) {
                Ok(z) => {
                    let diff = v(UM1).pow(q - 1) * v(U0) - (v(C1S) * v(U1) - z);
                    match member("congruence", &diff) {
                        Ok(()) => (Status::Pass, "holds modulo I".into()),
                        Err(e) => (Status::Fail, e),
                    }
                }
                Err(e) => (Status::Fail, e.to_string()),
            }
        });
        for s in 1..q - 1 {
            r.run(format!("z-recursion(s={s})"), || {
                let z_s = elem(BasisElementSpec::C { s, k: 0, t: 0 });
                let y = elem(BasisElementSpec::B { i: q - 1 - s, j: 0, k: 1, t: s });
                let z_next = if s < q - 2 {
                    elem(BasisElementSpec::C { s: s + 1, k: 0, t: 0 })
                } else {
                    Ok(v(C1) * v(C0S))
                };
                match (z_s, y, z_next) {
                    (Ok(z_s), Ok(y), Ok(z_next)) => match member("recursion", &(z_s * v(U1) - y - z_next)) {
                        Ok(()) => (Status::Pass, "holds modulo I".into()),
                        Err(e) => (Status::Fail, e),
                    },
                    (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => (Status::Fail, e.to_string()),
                }
            });
        }
    } else {
        r.run("Um1^(q-1)*U0 = C1s*U1 - z(1,0,0)", || {
            (Status::Skipped, "family C is empty for q = 2".into())
        });
    }
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GaloisField;

    fn gs(q: u32) -> GeneratorSet {
        GeneratorSet::new(&GaloisField::of_order(q).unwrap()).unwrap()
    }

    #[test]
    fn unit_times_unit() {
        let g = gs(2);
        let mut ctx = ProductContext::new(&g, None, None).unwrap();
        let one = BasisElementSpec::A { i: 0, j: 0, t: 0 };
        let cert = reduce_product(&mut ctx, one, one).unwrap();
        assert_eq!(cert.ell, vec![(one, g.s7.one())]);
        assert!(cert.cofactors.iter().all(|c| c.is_zero()));
        assert!(verify_certificate(&g, &cert).unwrap().verified());
    }

    #[test]
    fn q2_square_of_x11() {
        let g = gs(2);
        let mut ctx = ProductContext::new(&g, None, None).unwrap();
        let x = BasisElementSpec::A { i: 1, j: 1, t: 0 };
        let cert = reduce_product(&mut ctx, x, x).unwrap();
        let check = verify_certificate(&g, &cert).unwrap();
        assert!(check.verified());
        let json = cert.to_json(&g, true);
        let back = ReductionCertificate::from_json(&g, &json).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn q3_c_times_b() {
        let g = gs(3);
        let mut ctx = ProductContext::new(&g, None, None).unwrap();
        let cert = reduce_product(
            &mut ctx,
            BasisElementSpec::C { s: 1, k: 0, t: 0 },
            BasisElementSpec::B { i: 0, j: 0, k: 1, t: 0 },
        )
        .unwrap();
        assert!(verify_certificate(&g, &cert).unwrap().verified());
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let g = gs(2);
        let mut ctx = ProductContext::new(&g, None, None).unwrap();
        let x = BasisElementSpec::A { i: 1, j: 0, t: 0 };
        let mut cert = reduce_product(&mut ctx, x, x).unwrap();
        cert.cofactors[0] = &cert.cofactors[0] + &g.s7.var(U0);
        let check = verify_certificate(&g, &cert).unwrap();
        assert!(!check.verified());
        assert!(!check.s7_residual.is_zero());
    }

    #[test]
    fn all_pairs_q2() {
        let rep = check_products(&gs(2), Sample::All, None);
        assert_eq!(rep.items_with_prefix("A:").count() + rep.items_with_prefix("B:").count(), 21);
        assert_eq!(rep.overall(), Status::Pass, "{}", rep.to_text());
    }

    #[test]
    fn span_gap_witness() {
        let g2 = gs(2);
        let gb2 = buchberger(&g2.ideal(), MonomialOrder::GRevLex, &BuchbergerOptions::default()).unwrap();
        for d in 0..=16 {
            assert_eq!(basis_span_gap(&g2, &gb2, d).unwrap(), None, "degree {d}");
        }
        let g3 = gs(3);
        let gb3 = buchberger(&g3.ideal(), MonomialOrder::GRevLex, &BuchbergerOptions::default()).unwrap();
        assert_eq!(basis_span_gap(&g3, &gb3, 8).unwrap(), None);
        let witness = basis_span_gap(&g3, &gb3, 10).unwrap().unwrap();
        assert_eq!(witness.to_string(), "U0*U1^2");
    }

    #[test]
    fn sampling_is_seeded() {
        let a = select_pairs(48, Sample::Random { n: 100, seed: 1 });
        let b = select_pairs(48, Sample::Random { n: 100, seed: 1 });
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert_ne!(a, select_pairs(48, Sample::Random { n: 100, seed: 2 }));
        assert_eq!(select_pairs(6, Sample::All).len(), 21);
    }
}
