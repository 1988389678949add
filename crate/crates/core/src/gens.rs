//! The generators `c0, c1, c0*, c1*, u-1, u0, u1` of the `GL_2(F_q)`
//! invariants of `R4`, their auxiliaries, the five relations pulled back to
//! `S7`, the map `pi: S7 -> R4` and the module basis `A ∪ B ∪ C`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::action::{self, ActionError};
use crate::gf::GaloisField;
use crate::mpoly::{MonomialOrder, PolyError, Polynomial, Ring};

pub const S7_NAMES: [&str; 7] = ["C0", "C1", "C0s", "C1s", "Um1", "U0", "U1"];
pub const C0: usize = 0;
pub const C1: usize = 1;
pub const C0S: usize = 2;
pub const C1S: usize = 3;
pub const UM1: usize = 4;
pub const U0: usize = 5;
pub const U1: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("IndexOutOfRange: {0}")]
    IndexOutOfRange(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("invalid basis element `{0}`")]
    BadSpec(String),
}

/// Weights of the S7 variables for a given q.
pub fn s7_weights(q: u32) -> [u32; 7] {
    [q * q - 1, q * q - q, q * q - 1, q * q - q, q + 1, 2, q + 1]
}

/// `S7` with the weighted grading and the given order.
pub fn s7(field: &GaloisField, order: MonomialOrder) -> Ring {
    let w = s7_weights(field.q());
    Ring::new(field.clone(), &S7_NAMES, Some(&w), order).expect("valid ring")
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `C(n, k) mod p` via Lucas' theorem.
pub fn binomial_mod_lucas(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        acc = acc * (binomial(a, b) % p as u128) as u64 % p;
        n /= p;
        k /= p;
    }
    acc
}

/// `C(n, k)` as an element of the prime field, with sign `(-1)^sign`.
fn signed_binomial(field: &GaloisField, n: u64, k: u64, negative: bool) -> u8 {
    let c = field.from_int((binomial(n, k) % field.p() as u128) as i64);
    if negative {
        field.neg(c)
    } else {
        c
    }
}

/// `Σ_{i=1}^{s} (-1)^i C(s,i) ab^{s-i} w^{i-1}` where `ab` stands for
/// `u-1*u1` and `w` for `u0^{q+1}` (or their S7 counterparts).
pub fn binomial_tail(s: u32, ab: &Polynomial, w: &Polynomial) -> Polynomial {
    let ring = ab.ring();
    let field = ring.field();
    let mut acc = ring.zero();
    for i in 1..=s {
        let c = signed_binomial(field, s as u64, i as u64, i % 2 == 1);
        if c == 0 {
            continue;
        }
        let term = ab.pow(s - i) * w.pow(i - 1);
        acc = acc.add_scaled(c, None, &term);
    }
    acc
}

/// The Dickson-type polynomials and the invariants derived from them.
#[derive(Debug, Clone)]
pub struct Dickson {
    pub d0: Polynomial,
    pub d1: Polynomial,
    pub d2: Polynomial,
    pub c0: Polynomial,
    pub c1: Polynomial,
    pub d0s: Polynomial,
    pub d1s: Polynomial,
    pub d2s: Polynomial,
    pub c0s: Polynomial,
    pub c1s: Polynomial,
}

/// `det [[a1, a2], [b1, b2]]` with `a_i = x_i^{e}`, `b_i = x_i^{f}`.
fn power_det(r4: &Ring, e: u32, f: u32) -> Polynomial {
    let x1 = r4.var(0);
    let x2 = r4.var(1);
    x1.pow(e) * x2.pow(f) - x2.pow(e) * x1.pow(f)
}

pub fn make_dickson(r4: &Ring) -> Result<Dickson, GenError> {
    let q = r4.field().q();
    let d2 = power_det(r4, 1, q);
    let d1 = power_det(r4, 1, q * q);
    let d0 = power_det(r4, q, q * q);
    let c0 = d0.divide_exact(&d2)?;
    let c1 = d1.divide_exact(&d2)?;
    let star = |f: &Polynomial| action::involution_star(f);
    Ok(Dickson {
        d0s: star(&d0)?,
        d1s: star(&d1)?,
        d2s: star(&d2)?,
        c0s: star(&c0)?,
        c1s: star(&c1)?,
        d0,
        d1,
        d2,
        c0,
        c1,
    })
}

/// `u_i`: `x1^{q^i} y1 + x2^{q^i} y2` for `i >= 0`, and
/// `x1 y1^{q^|i|} + x2 y2^{q^|i|}` for `i < 0`.
pub fn make_u(r4: &Ring, i: i32) -> Polynomial {
    let e = r4.field().q().pow(i.unsigned_abs()) as u16;
    let (xe, ye) = if i >= 0 { (e, 1) } else { (1, e) };
    r4.term(1, r4.monomial(&[xe, 0, ye, 0])) + r4.term(1, r4.monomial(&[0, xe, 0, ye]))
}

/// The five defining relations of the presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    T1,
    T1s,
    T00,
    T10,
    T01,
}

impl Relation {
    pub const ALL: [Relation; 5] = [Relation::T1, Relation::T1s, Relation::T00, Relation::T10, Relation::T01];

    pub fn name(self) -> &'static str {
        match self {
            Relation::T1 => "T1",
            Relation::T1s => "T1s",
            Relation::T00 => "T00",
            Relation::T10 => "T10",
            Relation::T01 => "T01",
        }
    }
}

impl FromStr for Relation {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, GenError> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| GenError::UnknownRelation(s.to_string()))
    }
}

/// The left-hand side of a relation as a polynomial in `S7`.
pub fn make_relation(s7: &Ring, rel: Relation) -> Polynomial {
    let q = s7.field().q();
    let v = |i| s7.var(i);
    let ab = v(UM1) * v(U1);
    let w = v(U0).pow(q + 1);
    match rel {
        Relation::T1 => v(C0) * v(UM1) - v(C1) * v(U0).pow(q) + v(U1).pow(q),
        Relation::T1s => v(C0S) * v(U1) - v(C1S) * v(U0).pow(q) + v(UM1).pow(q),
        Relation::T00 => v(C0) * v(C0S) - (&ab - &w).pow(q - 1),
        Relation::T10 => {
            v(C1) * v(C0S) - v(C1S) * v(U1).pow(q - 1) - v(UM1) * v(U0) * binomial_tail(q - 1, &ab, &w)
        }
        Relation::T01 => {
            v(C0) * v(C1S) - v(C1) * v(UM1).pow(q - 1) - v(U0) * v(U1) * binomial_tail(q - 1, &ab, &w)
        }
    }
}

/// The ideal `I` in the order T1, T1s, T00, T10, T01.
pub fn ideal_i(s7: &Ring) -> Vec<Polynomial> {
    Relation::ALL.iter().map(|r| make_relation(s7, *r)).collect()
}

/// The double sum `Σ_{i=2}^{q-1} Σ_{j=1}^{i-1} (-1)^{2i-1} C(q-1,i) C(i-1,j)
/// ab^{q-j-2} k^j`, evaluated in whatever ring `ab` and `k` live in.
fn delta_sum(q: u32, ab: &Polynomial, k: &Polynomial) -> Polynomial {
    let ring = ab.ring();
    let field = ring.field();
    let p = field.p() as u128;
    let mut acc = ring.zero();
    for i in 2..q {
        for j in 1..i {
            let c = binomial((q - 1) as u64, i as u64) * binomial((i - 1) as u64, j as u64) % p;
            // (-1)^{2i-1} = -1
            let c = field.neg(field.from_int(c as i64));
            if c != 0 {
                acc = acc.add_scaled(c, None, &(ab.pow(q - j - 2) * k.pow(j)));
            }
        }
    }
    acc
}

/// The element `δ'` with `u-1^{q-1} u0 u1^{q-2} = c1 c0* - c1* u1^{q-1} - u-1 u0 δ'`,
/// written in `ab = u-1 u1` and `k = d2 d2*`. Obtained from (T10) by
/// expanding `u0^{(q+1)(i-1)} = (ab - k)^{i-1}`: the `k`-free part sums to
/// `-ab^{q-2}`, which leaves `-2 ab^{q-2}` after isolating the left side.
fn delta_corrected_sum(q: u32, ab: &Polynomial, k: &Polynomial) -> Polynomial {
    let ring = ab.ring();
    let field = ring.field();
    let p = field.p() as u128;
    let mut acc = ab.pow(q - 2).scale_raw(field.from_int(-2));
    for i in 2..q {
        for j in 1..i {
            let c = binomial((q - 1) as u64, i as u64) * binomial((i - 1) as u64, j as u64) % p;
            let c = field.from_int(c as i64);
            // (-1)^i from the binomial tail, (-1)^j from the expansion.
            let c = if (i + j) % 2 == 1 { field.neg(c) } else { c };
            if c != 0 {
                acc = acc.add_scaled(c, None, &(ab.pow(q - j - 2) * k.pow(j)));
            }
        }
    }
    acc
}

/// Everything built from a field: both rings, the generators and the
/// auxiliary polynomials.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub field: GaloisField,
    pub r4: Ring,
    pub s7: Ring,
    pub dickson: Dickson,
    pub um1: Polynomial,
    pub u0: Polynomial,
    pub u1: Polynomial,
}

impl GeneratorSet {
    pub fn new(field: &GaloisField) -> Result<Self, GenError> {
        Self::with_order(field, MonomialOrder::GRevLex)
    }

    /// Uses `order` for the S7 ring.
    pub fn with_order(field: &GaloisField, order: MonomialOrder) -> Result<Self, GenError> {
        let r4 = action::r4(field);
        let s7 = s7(field, order);
        let dickson = make_dickson(&r4)?;
        Ok(GeneratorSet {
            field: field.clone(),
            um1: make_u(&r4, -1),
            u0: make_u(&r4, 0),
            u1: make_u(&r4, 1),
            r4,
            s7,
            dickson,
        })
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// The images of the S7 variables, in variable order.
    pub fn images(&self) -> [Polynomial; 7] {
        let d = &self.dickson;
        [
            d.c0.clone(),
            d.c1.clone(),
            d.c0s.clone(),
            d.c1s.clone(),
            self.um1.clone(),
            self.u0.clone(),
            self.u1.clone(),
        ]
    }

    /// `(name, polynomial)` for the seven generators.
    pub fn named_generators(&self) -> Vec<(&'static str, Polynomial)> {
        let names = ["c0", "c1", "c0s", "c1s", "um1", "u0", "u1"];
        names.into_iter().zip(self.images()).collect()
    }

    pub fn u(&self, i: i32) -> Polynomial {
        make_u(&self.r4, i)
    }

    /// `pi: S7 -> R4`.
    pub fn pi(&self, f: &Polynomial) -> Result<Polynomial, GenError> {
        if f.ring() != &self.s7 && f.ring().names() != self.s7.names() {
            return Err(PolyError::RingMismatch.into());
        }
        if f.field() != &self.field {
            return Err(PolyError::RingMismatch.into());
        }
        Ok(f.substitute(&self.images())?)
    }

    /// `d2 * d2*`.
    pub fn k00(&self) -> Polynomial {
        &self.dickson.d2 * &self.dickson.d2s
    }

    /// `U-1 U1 - U0^{q+1}`, the S7 stand-in for `d2 d2*`.
    pub fn k_s7(&self) -> Polynomial {
        let v = |i| self.s7.var(i);
        v(UM1) * v(U1) - v(U0).pow(self.q() + 1)
    }

    /// `h_s = (u1^{s+1} d2*^{q-1-s} + u-1^{q-s} d2^s) / u0^q`.
    pub fn make_h(&self, s: u32) -> Result<Polynomial, GenError> {
        let q = self.q();
        if s > q - 1 {
            return Err(GenError::IndexOutOfRange(format!("h_{s} needs 0 <= s <= {}", q - 1)));
        }
        let d = &self.dickson;
        let num = self.u1.pow(s + 1) * d.d2s.pow(q - 1 - s) + self.um1.pow(q - s) * d.d2.pow(s);
        Ok(num.divide_exact(&self.u0.pow(q))?)
    }

    /// The literal double-sum element δ and its S7 counterpart Δ.
    pub fn make_delta(&self) -> (Polynomial, Polynomial) {
        let q = self.q();
        let ab = &self.um1 * &self.u1;
        let delta = delta_sum(q, &ab, &self.k00());
        let v = |i| self.s7.var(i);
        let big = delta_sum(q, &(v(UM1) * v(U1)), &self.k_s7());
        (delta, big)
    }

    /// The element that actually satisfies
    /// `u-1^{q-1} u0 u1^{q-2} = c1 c0* - c1* u1^{q-1} - u-1 u0 δ'`.
    pub fn make_delta_corrected(&self) -> (Polynomial, Polynomial) {
        let q = self.q();
        let ab = &self.um1 * &self.u1;
        let delta = delta_corrected_sum(q, &ab, &self.k00());
        let v = |i| self.s7.var(i);
        let big = delta_corrected_sum(q, &(v(UM1) * v(U1)), &self.k_s7());
        (delta, big)
    }

    pub fn relation(&self, rel: Relation) -> Polynomial {
        make_relation(&self.s7, rel)
    }

    pub fn ideal(&self) -> Vec<Polynomial> {
        ideal_i(&self.s7)
    }

    pub fn basis_element(&self, spec: BasisElementSpec) -> Result<BasisElement, GenError> {
        make_basis_element(self, spec)
    }
}

/// Index of a basis element of the N-module `A ∪ B ∪ C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisElementSpec {
    A { i: u32, j: u32, t: u32 },
    B { i: u32, j: u32, k: u32, t: u32 },
    C { s: u32, k: u32, t: u32 },
}

impl BasisElementSpec {
    pub fn family(&self) -> char {
        match self {
            BasisElementSpec::A { .. } => 'A',
            BasisElementSpec::B { .. } => 'B',
            BasisElementSpec::C { .. } => 'C',
        }
    }

    pub fn in_range(&self, q: u32) -> bool {
        match *self {
            BasisElementSpec::A { i, j, t } => i < q && j < q && t + 2 <= q,
            BasisElementSpec::B { i, j, k, t } => i + 2 <= q && j + 2 <= q && (1..=q).contains(&k) && t + 2 <= q,
            BasisElementSpec::C { s, k, t } => s >= 1 && s + 2 <= q && k < q && t + 2 <= q,
        }
    }

    /// Weighted degree of the pullback.
    pub fn degree(&self, q: u32) -> u32 {
        match *self {
            BasisElementSpec::A { i, j, t } => (i + j) * (q + 1) + t * (2 * q + 2),
            BasisElementSpec::B { i, j, k, t } => (i + j) * (q + 1) + 2 * k + t * (2 * q + 2),
            BasisElementSpec::C { s, k, t } => (q * q - q) + s * (q + 1) + 2 * k + t * (2 * q + 2),
        }
    }
}

impl fmt::Display for BasisElementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisElementSpec::A { i, j, t } => write!(f, "A:{i},{j},{t}"),
            BasisElementSpec::B { i, j, k, t } => write!(f, "B:{i},{j},{k},{t}"),
            BasisElementSpec::C { s, k, t } => write!(f, "C:{s},{k},{t}"),
        }
    }
}

impl FromStr for BasisElementSpec {
    type Err = GenError;
    fn from_str(text: &str) -> Result<Self, GenError> {
        let bad = || GenError::BadSpec(text.to_string());
        let (fam, rest) = text.trim().split_once(':').ok_or_else(bad)?;
        let idx: Vec<u32> = rest
            .split(',')
            .map(|s| s.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match (fam.trim(), idx.as_slice()) {
            ("A", &[i, j, t]) => Ok(BasisElementSpec::A { i, j, t }),
            ("B", &[i, j, k, t]) => Ok(BasisElementSpec::B { i, j, k, t }),
            ("C", &[s, k, t]) => Ok(BasisElementSpec::C { s, k, t }),
            _ => Err(bad()),
        }
    }
}

/// A basis element with its pullback to `S7` and its value in `R4`.
#[derive(Debug, Clone)]
pub struct BasisElement {
    pub spec: BasisElementSpec,
    pub pullback: Polynomial,
    pub value: Polynomial,
    pub degree: u32,
}

pub fn make_basis_element(gs: &GeneratorSet, spec: BasisElementSpec) -> Result<BasisElement, GenError> {
    let q = gs.q();
    if !spec.in_range(q) {
        return Err(GenError::IndexOutOfRange(format!("{spec} for q = {q}")));
    }
    let v = |i| gs.s7.var(i);
    let k_s7 = gs.k_s7();
    let k_r4 = gs.k00();
    let (pullback, value) = match spec {
        BasisElementSpec::A { i, j, t } => (
            v(UM1).pow(i) * v(U1).pow(j) * k_s7.pow(t),
            gs.um1.pow(i) * gs.u1.pow(j) * k_r4.pow(t),
        ),
        BasisElementSpec::B { i, j, k, t } => (
            v(UM1).pow(i) * v(U1).pow(j) * v(U0).pow(k) * k_s7.pow(t),
            gs.um1.pow(i) * gs.u1.pow(j) * gs.u0.pow(k) * k_r4.pow(t),
        ),
        BasisElementSpec::C { s, k, t } => {
            // h_s d2*^s through its expression in the generators.
            let tail = binomial_tail(s, &(v(UM1) * v(U1)), &v(U0).pow(q + 1));
            let hs = v(C1S) * v(U1).pow(s) + v(UM1).pow(q - s) * v(U0) * tail;
            (
                v(U0).pow(k) * hs * k_s7.pow(t),
                gs.make_h(s)? * gs.dickson.d2s.pow(s) * gs.u0.pow(k) * k_r4.pow(t),
            )
        }
    };
    Ok(BasisElement {
        spec,
        pullback,
        value,
        degree: spec.degree(q),
    })
}

/// All basis specs: family A, then B, then C, each in lexicographic index order.
pub fn enumerate_basis(q: u32) -> Vec<BasisElementSpec> {
    let mut out = Vec::new();
    for i in 0..q {
        for j in 0..q {
            for t in 0..q - 1 {
                out.push(BasisElementSpec::A { i, j, t });
            }
        }
    }
    for i in 0..q - 1 {
        for j in 0..q - 1 {
            for k in 1..=q {
                for t in 0..q - 1 {
                    out.push(BasisElementSpec::B { i, j, k, t });
                }
            }
        }
    }
    for s in 1..q.saturating_sub(1) {
        for k in 0..q {
            for t in 0..q - 1 {
                out.push(BasisElementSpec::C { s, k, t });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{enumerate_gl2, enumerate_sl2, involution_star, is_invariant};

    fn gs(q: u32) -> GeneratorSet {
        GeneratorSet::new(&GaloisField::of_order(q).unwrap()).unwrap()
    }

    #[test]
    fn binomials_agree_with_lucas() {
        for p in [2u64, 3, 5, 7] {
            for n in 0..30 {
                for k in 0..=n {
                    assert_eq!((binomial(n, k) % p as u128) as u64, binomial_mod_lucas(n, k, p));
                }
            }
        }
        assert_eq!(binomial(8, 4), 70);
    }

    #[test]
    fn dickson_over_gf2() {
        let g = gs(2);
        let r = &g.r4;
        assert_eq!(g.dickson.d2, r.parse("x1*x2^2 + x1^2*x2").unwrap());
        // c1 * d2 = d1 checked by multiplication rather than division.
        let c1 = r.parse("x1^2 + x1*x2 + x2^2").unwrap();
        assert_eq!(&c1 * &g.dickson.d2, g.dickson.d1);
        assert_eq!(g.dickson.c1, c1);
    }

    #[test]
    fn c0_is_power_of_d2() {
        for q in [2, 3, 4, 5] {
            let g = gs(q);
            assert_eq!(g.dickson.c0, g.dickson.d2.pow(q - 1));
            assert_eq!(&g.dickson.c1 * &g.dickson.d2, g.dickson.d1);
        }
    }

    #[test]
    fn u_definitions() {
        let g = gs(3);
        let r = &g.r4;
        assert_eq!(g.u(0), r.parse("x1*y1 + x2*y2").unwrap());
        assert_eq!(g.u(1), r.parse("x1^3*y1 + x2^3*y2").unwrap());
        let g2 = gs(2);
        assert_eq!(g2.u(-2), g2.r4.parse("x1*y1^4 + x2*y2^4").unwrap());
        for i in 1..=3 {
            assert_eq!(involution_star(&g.u(-i)).unwrap(), g.u(i));
        }
    }

    #[test]
    fn generator_degrees_and_invariance() {
        for q in [2, 3] {
            let g = gs(q);
            let group = enumerate_gl2(&g.field);
            let expected = [q * q - 1, q * q - q, q * q - 1, q * q - q, q + 1, 2, q + 1];
            for ((name, f), d) in g.named_generators().into_iter().zip(expected) {
                assert_eq!(f.weighted_degree(), Some(d), "{name}");
                assert!(is_invariant(&f, &group).unwrap(), "{name}");
            }
            assert!(is_invariant(&g.k00(), &group).unwrap());
        }
    }

    #[test]
    fn h_family() {
        for q in [2, 3, 4, 5] {
            let g = gs(q);
            let h: Vec<_> = (0..q).map(|s| g.make_h(s).unwrap()).collect();
            assert_eq!(h[0], g.dickson.c1s);
            assert_eq!(h[q as usize - 1], g.dickson.c1);
            for s in 0..q as usize {
                assert_eq!(h[s].weighted_degree(), Some(q * q - q));
                assert_eq!(involution_star(&h[s]).unwrap(), h[q as usize - 1 - s]);
            }
            if q <= 3 {
                let sl = enumerate_sl2(&g.field);
                assert!(h.iter().all(|f| is_invariant(f, &sl).unwrap()));
            }
        }
        assert!(matches!(gs(3).make_h(3), Err(GenError::IndexOutOfRange(_))));
    }

    #[test]
    fn relations_are_homogeneous_and_vanish() {
        for q in [2, 3, 4, 5] {
            let g = gs(q);
            let ideal = g.ideal();
            assert_eq!(ideal.len(), 5);
            for (rel, f) in Relation::ALL.iter().zip(&ideal) {
                assert!(f.is_homogeneous(), "{} q={q}", rel.name());
                assert!(g.pi(f).unwrap().is_zero(), "{} q={q}", rel.name());
            }
        }
    }

    #[test]
    fn relation_texts() {
        let g = gs(3);
        let s = &g.s7;
        assert_eq!(g.relation(Relation::T1), s.parse("C0*Um1 - C1*U0^3 + U1^3").unwrap());
        assert_eq!(
            g.relation(Relation::T00),
            s.parse("C0*C0s").unwrap() - s.parse("Um1*U1 - U0^4").unwrap().pow(2)
        );
        assert_eq!("T10".parse::<Relation>().unwrap(), Relation::T10);
        assert!("T2".parse::<Relation>().is_err());
    }

    #[test]
    fn delta_values() {
        assert!(gs(2).make_delta().0.is_zero());
        // Single term (i, j) = (2, 1): -C(2,2) C(1,1) = -1.
        let g = gs(3);
        let (d, big) = g.make_delta();
        assert_eq!(d, -g.k00());
        assert_eq!(g.pi(&big).unwrap(), d);
    }

    /// δ solved from the identity by exact division.
    fn delta_oracle(g: &GeneratorSet) -> Polynomial {
        let q = g.q();
        let d = &g.dickson;
        let lhs = g.um1.pow(q - 1) * &g.u0 * g.u1.pow(q - 2);
        let residual = &d.c1 * &d.c0s - &d.c1s * g.u1.pow(q - 1) - lhs;
        residual.divide_exact(&(&g.um1 * &g.u0)).unwrap()
    }

    #[test]
    fn literal_delta_against_oracle() {
        let g = gs(2);
        assert_eq!(g.make_delta().0, delta_oracle(&g));
        for q in [3, 5, 7] {
            let g = gs(q);
            assert_ne!(g.make_delta().0, delta_oracle(&g), "q = {q}");
        }
    }

    #[test]
    fn corrected_delta_identity() {
        for q in [2, 3, 4, 5, 7] {
            let g = gs(q);
            let d = &g.dickson;
            let (delta, big) = g.make_delta_corrected();
            assert_eq!(delta, delta_oracle(&g), "q = {q}");
            let lhs = g.um1.pow(q - 1) * &g.u0 * g.u1.pow(q - 2);
            let rhs = &d.c1 * &d.c0s - &d.c1s * g.u1.pow(q - 1) - &g.um1 * &g.u0 * &delta;
            assert_eq!(lhs, rhs, "q = {q}");
            assert_eq!(g.pi(&big).unwrap(), delta);
        }
    }

    #[test]
    fn basis_counts() {
        for (q, a, b, c) in [(2u32, 4, 2, 0), (3, 18, 24, 6), (4, 48, 108, 24), (5, 100, 320, 60)] {
            let specs = enumerate_basis(q);
            let count = |fam: char| specs.iter().filter(|s| s.family() == fam).count();
            assert_eq!((count('A'), count('B'), count('C')), (a, b, c));
            assert_eq!(specs.len() as u32, (q * q - 1) * (q * q - q));
            assert!(specs.iter().all(|s| s.in_range(q)));
        }
    }

    #[test]
    fn basis_elements() {
        for q in [2, 3, 4] {
            let g = gs(q);
            for spec in enumerate_basis(q) {
                let e = g.basis_element(spec).unwrap();
                assert_eq!(g.pi(&e.pullback).unwrap(), e.value, "{spec}");
                assert_eq!(e.pullback.weighted_degree(), Some(e.degree), "{spec}");
                assert_eq!(e.value.weighted_degree(), Some(e.degree), "{spec}");
            }
        }
        let g = gs(3);
        let one = g.basis_element(BasisElementSpec::A { i: 0, j: 0, t: 0 }).unwrap();
        assert_eq!(one.pullback, g.s7.one());
        let c = g.basis_element(BasisElementSpec::C { s: 1, k: 0, t: 0 }).unwrap();
        assert_eq!(c.degree, 10);
        assert_eq!(c.value, g.make_h(1).unwrap() * &g.dickson.d2s);
        let x = g.basis_element(BasisElementSpec::A { i: 1, j: 1, t: 1 }).unwrap();
        assert_eq!(x.value, &g.um1 * &g.u1 * g.k00());
        assert!(matches!(
            g.basis_element(BasisElementSpec::A { i: 3, j: 0, t: 0 }),
            Err(GenError::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn spec_text_round_trip() {
        for spec in enumerate_basis(4) {
            assert_eq!(spec.to_string().parse::<BasisElementSpec>().unwrap(), spec);
        }
        assert!("D:1,2".parse::<BasisElementSpec>().is_err());
        assert!("A:1,2".parse::<BasisElementSpec>().is_err());
    }
}
