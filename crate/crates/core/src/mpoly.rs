//! Sparse multivariate polynomials over GF(q).
//!
//! A [`Polynomial`] is a list of `(monomial, coefficient)` terms kept sorted
//! in strictly descending order for its ring's monomial order, with no zero
//! coefficients. Two polynomials are equal exactly when their term lists are.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::gf::{FieldElement, FieldError, GaloisField};

/// Maximum number of variables in a ring.
pub const MAX_VARS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("RingMismatch: operands live in different rings")]
    RingMismatch,
    #[error("NotDivisible: nonzero remainder in exact division")]
    NotDivisible,
    #[error("DivisionByZero")]
    DivisionByZero,
    #[error("MissingImage: no image given for variable `{0}`")]
    MissingImage(String),
    #[error("SyntaxError at position {pos}: {message}")]
    SyntaxError { pos: usize, message: String },
    #[error("UnknownVariable: `{0}`")]
    UnknownVariable(String),
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The supported monomial orders. All of them compare the weighted degree
/// first except `Lex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    /// Weighted degree, ties broken reverse-lexicographically.
    GRevLex,
    /// Weighted degree, ties broken lexicographically.
    GLex,
    /// Pure lexicographic.
    Lex,
    /// Weighted degree in the first `first` variables, then `GRevLex`.
    /// Any polynomial whose leading monomial avoids the first block lies
    /// entirely in the remaining variables.
    Elimination { first: usize },
}

/// An exponent vector together with its weighted degree in the owning ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    deg: u32,
    exps: [u16; MAX_VARS],
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        deg: 0,
        exps: [0; MAX_VARS],
    };

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn exponents(&self) -> &[u16; MAX_VARS] {
        &self.exps
    }

    pub fn exponent(&self, var: usize) -> u16 {
        self.exps[var]
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    #[inline]
    pub fn divides(&self, other: &Monomial) -> bool {
        self.deg <= other.deg && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    #[inline]
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps;
        for (e, o) in exps.iter_mut().zip(&other.exps) {
            *e = e.checked_add(*o).expect("exponent overflow");
        }
        Monomial {
            deg: self.deg + other.deg,
            exps,
        }
    }

    /// `self / other` when `other` divides `self`.
    #[inline]
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if !other.divides(self) {
            return None;
        }
        let mut exps = self.exps;
        for (e, o) in exps.iter_mut().zip(&other.exps) {
            *e -= o;
        }
        Some(Monomial {
            deg: self.deg - other.deg,
            exps,
        })
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| *a == 0 || *b == 0)
    }
}

#[derive(Clone)]
pub struct Ring(Arc<RingData>);

struct RingData {
    field: GaloisField,
    names: Vec<String>,
    weights: Vec<u32>,
    order: MonomialOrder,
}

impl Ring {
    pub fn new(
        field: GaloisField,
        names: &[&str],
        weights: Option<&[u32]>,
        order: MonomialOrder,
    ) -> Result<Self, PolyError> {
        if names.is_empty() || names.len() > MAX_VARS {
            return Err(PolyError::InvalidRing(format!("{} variables", names.len())));
        }
        for (i, n) in names.iter().enumerate() {
            let valid = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(PolyError::InvalidRing(format!("bad variable name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(PolyError::InvalidRing(format!("duplicate variable `{n}`")));
            }
        }
        let weights = match weights {
            Some(w) if w.len() != names.len() || w.contains(&0) => {
                return Err(PolyError::InvalidRing("weights must be positive, one per variable".into()))
            }
            Some(w) => w.to_vec(),
            None => vec![1; names.len()],
        };
        if let MonomialOrder::Elimination { first } = order {
            if first > names.len() {
                return Err(PolyError::InvalidRing("elimination block too large".into()));
            }
        }
        Ok(Ring(Arc::new(RingData {
            field,
            names: names.iter().map(|s| s.to_string()).collect(),
            weights,
            order,
        })))
    }

    /// Same field, variables and weights under a different order.
    pub fn with_order(&self, order: MonomialOrder) -> Ring {
        let names: Vec<&str> = self.0.names.iter().map(String::as_str).collect();
        Ring::new(self.0.field.clone(), &names, Some(&self.0.weights), order)
            .expect("derived from a valid ring")
    }

    pub fn field(&self) -> &GaloisField {
        &self.0.field
    }

    pub fn nvars(&self) -> usize {
        self.0.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn weights(&self) -> &[u32] {
        &self.0.weights
    }

    pub fn order(&self) -> MonomialOrder {
        self.0.order
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|n| n == name)
    }

    pub fn monomial(&self, exps: &[u16]) -> Monomial {
        assert!(exps.len() <= self.nvars(), "too many exponents for ring");
        let mut e = [0u16; MAX_VARS];
        e[..exps.len()].copy_from_slice(exps);
        self.monomial_from_array(e)
    }

    pub(crate) fn monomial_from_array(&self, exps: [u16; MAX_VARS]) -> Monomial {
        let deg = exps
            .iter()
            .zip(&self.0.weights)
            .map(|(&e, &w)| e as u32 * w)
            .sum();
        Monomial { deg, exps }
    }

    pub fn lcm(&self, a: &Monomial, b: &Monomial) -> Monomial {
        let mut e = a.exps;
        for (x, y) in e.iter_mut().zip(&b.exps) {
            *x = (*x).max(*y);
        }
        self.monomial_from_array(e)
    }

    #[inline]
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let n = self.nvars();
        match self.0.order {
            MonomialOrder::GRevLex => a.deg.cmp(&b.deg).then_with(|| revlex(a, b, n)),
            MonomialOrder::GLex => a.deg.cmp(&b.deg).then_with(|| a.exps[..n].cmp(&b.exps[..n])),
            MonomialOrder::Lex => a.exps[..n].cmp(&b.exps[..n]),
            MonomialOrder::Elimination { first } => {
                let block = |m: &Monomial| -> u32 {
                    m.exps[..first]
                        .iter()
                        .zip(&self.0.weights)
                        .map(|(&e, &w)| e as u32 * w)
                        .sum()
                };
                block(a)
                    .cmp(&block(b))
                    .then_with(|| a.deg.cmp(&b.deg))
                    .then_with(|| revlex(a, b, n))
            }
        }
    }

    pub fn is_graded(&self) -> bool {
        matches!(self.0.order, MonomialOrder::GRevLex | MonomialOrder::GLex)
    }

    pub fn zero(&self) -> Polynomial {
        Polynomial {
            ring: self.clone(),
            terms: Vec::new(),
        }
    }

    pub fn one(&self) -> Polynomial {
        self.constant_raw(1)
    }

    pub fn constant(&self, c: &FieldElement) -> Polynomial {
        assert!(c.field() == self.field(), "constant from a different field");
        self.constant_raw(c.raw())
    }

    pub fn constant_raw(&self, c: u8) -> Polynomial {
        self.term(c, Monomial::ONE)
    }

    /// The constant `n mod p`.
    pub fn int(&self, n: i64) -> Polynomial {
        self.constant_raw(self.field().from_int(n))
    }

    pub fn term(&self, c: u8, m: Monomial) -> Polynomial {
        let terms = if c == 0 { Vec::new() } else { vec![Term { mono: m, coeff: c }] };
        Polynomial {
            ring: self.clone(),
            terms,
        }
    }

    pub fn var(&self, i: usize) -> Polynomial {
        assert!(i < self.nvars(), "variable index out of range");
        let mut e = [0u16; MAX_VARS];
        e[i] = 1;
        self.term(1, self.monomial_from_array(e))
    }

    pub fn var_named(&self, name: &str) -> Result<Polynomial, PolyError> {
        self.index_of(name)
            .map(|i| self.var(i))
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    /// All monomials of weighted degree exactly `d` in the variables `vars`.
    pub fn monomials_of_degree_in(&self, d: u32, vars: &[usize]) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut exps = [0u16; MAX_VARS];
        self.enumerate_rec(d, vars, 0, &mut exps, &mut out);
        out
    }

    pub fn monomials_of_degree(&self, d: u32) -> Vec<Monomial> {
        let vars: Vec<usize> = (0..self.nvars()).collect();
        self.monomials_of_degree_in(d, &vars)
    }

    fn enumerate_rec(
        &self,
        remaining: u32,
        vars: &[usize],
        pos: usize,
        exps: &mut [u16; MAX_VARS],
        out: &mut Vec<Monomial>,
    ) {
        if pos == vars.len() {
            if remaining == 0 {
                out.push(self.monomial_from_array(*exps));
            }
            return;
        }
        let v = vars[pos];
        let w = self.0.weights[v];
        let mut e = 0;
        while e * w <= remaining {
            exps[v] = e as u16;
            self.enumerate_rec(remaining - e * w, vars, pos + 1, exps, out);
            e += 1;
        }
        exps[v] = 0;
    }

    pub fn parse(&self, text: &str) -> Result<Polynomial, PolyError> {
        Parser::new(self, text).parse()
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (i, name) in self.0.names.iter().enumerate() {
            match m.exps[i] {
                0 => {}
                1 => parts.push(name.clone()),
                e => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

#[inline]
fn revlex(a: &Monomial, b: &Monomial, n: usize) -> Ordering {
    for i in (0..n).rev() {
        if a.exps[i] != b.exps[i] {
            return b.exps[i].cmp(&a.exps[i]);
        }
    }
    Ordering::Equal
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.field == other.0.field
                && self.0.names == other.0.names
                && self.0.weights == other.0.weights
                && self.0.order == other.0.order)
    }
}

impl Eq for Ring {}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] {:?}", self.0.field, self.0.names.join(","), self.0.order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub mono: Monomial,
    /// Raw field encoding, never zero inside a polynomial.
    pub coeff: u8,
}

#[derive(Clone)]
pub struct Polynomial {
    ring: Ring,
    terms: Vec<Term>,
}

impl Polynomial {
    /// Wraps terms that are already sorted descending with nonzero coefficients.
    pub(crate) fn from_sorted_terms(ring: &Ring, terms: Vec<Term>) -> Polynomial {
        debug_assert!(terms.windows(2).all(|w| ring.cmp(&w[0].mono, &w[1].mono) == Ordering::Greater));
        Polynomial {
            ring: ring.clone(),
            terms,
        }
    }

    /// Removes and returns the leading term.
    pub(crate) fn pop_leading(&mut self) -> Option<Term> {
        if self.terms.is_empty() {
            None
        } else {
            Some(self.terms.remove(0))
        }
    }

    /// Builds a canonical polynomial from terms in any order, merging
    /// repeated monomials.
    pub fn from_terms(ring: &Ring, terms: Vec<Term>) -> Polynomial {
        let f = ring.field();
        let mut acc: FxHashMap<Monomial, u8> = FxHashMap::default();
        for t in terms {
            let e = acc.entry(t.mono).or_insert(0);
            *e = f.add(*e, t.coeff);
        }
        Self::from_map(ring, acc)
    }

    fn from_map(ring: &Ring, acc: FxHashMap<Monomial, u8>) -> Polynomial {
        let mut terms: Vec<Term> = acc
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(mono, coeff)| Term { mono, coeff })
            .collect();
        terms.sort_unstable_by(|a, b| ring.cmp(&b.mono, &a.mono));
        Polynomial {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn field(&self) -> &GaloisField {
        self.ring.field()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_term(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|t| &t.mono)
    }

    /// Coefficient of `m`, zero when absent.
    pub fn coefficient(&self, m: &Monomial) -> FieldElement {
        let raw = self
            .terms
            .binary_search_by(|t| self.ring.cmp(m, &t.mono))
            .map(|i| self.terms[i].coeff)
            .unwrap_or(0);
        self.field().element(raw)
    }

    /// Largest weighted degree of a term; `None` stands for minus infinity.
    pub fn weighted_degree(&self) -> Option<u32> {
        if self.ring.is_graded() {
            self.terms.first().map(|t| t.mono.deg)
        } else {
            self.terms.iter().map(|t| t.mono.deg).max()
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some(t) => self.terms.iter().all(|u| u.mono.deg == t.mono.deg),
        }
    }

    /// Variables that occur with a positive exponent.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.ring.nvars())
            .filter(|&i| self.terms.iter().any(|t| t.mono.exps[i] > 0))
            .collect()
    }

    fn check_ring(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(PolyError::RingMismatch)
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ring(other)?;
        Ok(self.merge(other, 1, None))
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ring(other)?;
        Ok(self.merge(other, self.field().neg(1), None))
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ring(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// `self + c * m * other`, all in the same ring.
    pub fn add_scaled(&self, c: u8, m: Option<&Monomial>, other: &Polynomial) -> Polynomial {
        self.merge(other, c, m)
    }

    /// In-place `self += c * m * other`.
    pub fn add_scaled_assign(&mut self, c: u8, m: &Monomial, other: &Polynomial) {
        if c == 0 || other.is_zero() {
            return;
        }
        let merged = self.merge(other, c, Some(m));
        self.terms = merged.terms;
    }

    fn merge(&self, other: &Polynomial, c: u8, shift: Option<&Monomial>) -> Polynomial {
        let f = self.field();
        let ring = &self.ring;
        if c == 0 || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut i = 0;
        let mut j = 0;
        let a = &self.terms;
        let b = &other.terms;
        let shifted = |t: &Term| -> Term {
            Term {
                mono: match shift {
                    Some(m) => t.mono.mul(m),
                    None => t.mono,
                },
                coeff: f.mul(c, t.coeff),
            }
        };
        let mut next_b = b.first().map(shifted);
        while i < a.len() || next_b.is_some() {
            match (a.get(i), next_b) {
                (Some(x), Some(y)) => match ring.cmp(&x.mono, &y.mono) {
                    Ordering::Greater => {
                        out.push(*x);
                        i += 1;
                    }
                    Ordering::Less => {
                        out.push(y);
                        j += 1;
                        next_b = b.get(j).map(shifted);
                    }
                    Ordering::Equal => {
                        let s = f.add(x.coeff, y.coeff);
                        if s != 0 {
                            out.push(Term { mono: x.mono, coeff: s });
                        }
                        i += 1;
                        j += 1;
                        next_b = b.get(j).map(shifted);
                    }
                },
                (Some(x), None) => {
                    out.extend_from_slice(&a[i..]);
                    let _ = x;
                    break;
                }
                (None, Some(y)) => {
                    out.push(y);
                    j += 1;
                    next_b = b.get(j).map(shifted);
                }
                (None, None) => break,
            }
        }
        Polynomial {
            ring: ring.clone(),
            terms: out,
        }
    }

    fn mul_unchecked(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return self.ring.zero();
        }
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        if small.len() == 1 {
            let t = small.terms[0];
            return big.mul_term(t.coeff, &t.mono);
        }
        let f = self.field();
        let mut acc: FxHashMap<Monomial, u8> =
            FxHashMap::with_capacity_and_hasher(big.len() * 2, Default::default());
        for s in &small.terms {
            for b in &big.terms {
                let e = acc.entry(s.mono.mul(&b.mono)).or_insert(0);
                *e = f.add(*e, f.mul(s.coeff, b.coeff));
            }
        }
        Self::from_map(&self.ring, acc)
    }

    /// `c * m * self`; the order is multiplicative so no re-sorting is needed.
    pub fn mul_term(&self, c: u8, m: &Monomial) -> Polynomial {
        let f = self.field();
        if c == 0 {
            return self.ring.zero();
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    mono: t.mono.mul(m),
                    coeff: f.mul(c, t.coeff),
                })
                .collect(),
        }
    }

    pub fn scale(&self, c: &FieldElement) -> Polynomial {
        assert!(c.field() == self.field(), "scalar from a different field");
        self.scale_raw(c.raw())
    }

    pub fn scale_raw(&self, c: u8) -> Polynomial {
        self.mul_term(c, &Monomial::ONE)
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Polynomial {
        match self.terms.first() {
            None => self.clone(),
            Some(t) => self.scale_raw(self.field().inv(t.coeff).expect("nonzero")),
        }
    }

    /// `self^p` computed coefficient-wise, valid in characteristic p.
    pub fn frobenius_power(&self) -> Polynomial {
        let f = self.field();
        let p = f.p() as u16;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut e = t.mono.exps;
                for x in e.iter_mut() {
                    *x = x.checked_mul(p).expect("exponent overflow");
                }
                Term {
                    mono: Monomial {
                        deg: t.mono.deg * p as u32,
                        exps: e,
                    },
                    coeff: f.frobenius(t.coeff),
                }
            })
            .collect();
        Polynomial {
            ring: self.ring.clone(),
            terms,
        }
    }

    /// `self^n`, with `f^0 = 1`. Uses the base-p digits of `n` so that the
    /// p-th powers come for free.
    pub fn pow(&self, n: u32) -> Polynomial {
        if n == 0 {
            return self.ring.one();
        }
        if self.is_zero() {
            return self.clone();
        }
        let p = self.field().p();
        let mut result = self.ring.one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            let digit = n % p;
            if digit > 0 {
                result = result.mul_unchecked(&base.pow_small(digit));
            }
            n /= p;
            if n > 0 {
                base = base.frobenius_power();
            }
        }
        result
    }

    fn pow_small(&self, n: u32) -> Polynomial {
        let mut result = self.ring.one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        result
    }

    /// Exact quotient `self / g` by long division with a single divisor.
    pub fn divide_exact(&self, g: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ring(g)?;
        let lead = *g.leading_term().ok_or(PolyError::DivisionByZero)?;
        let f = self.field();
        let inv = f.inv(lead.coeff).expect("leading coefficient is nonzero");
        let mut rem = self.clone();
        let mut quotient = Vec::new();
        while let Some(t) = rem.terms.first().copied() {
            let m = t.mono.div(&lead.mono).ok_or(PolyError::NotDivisible)?;
            let c = f.mul(t.coeff, inv);
            quotient.push(Term { mono: m, coeff: c });
            rem = rem.merge(g, f.neg(c), Some(&m));
        }
        // Quotient terms come out in strictly descending order.
        Ok(Polynomial {
            ring: self.ring.clone(),
            terms: quotient,
        })
    }

    /// Applies the ring homomorphism sending variable `i` to `images[i]` and
    /// fixing the field. All images must share one target ring.
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Polynomial, PolyError> {
        let n = self.ring.nvars();
        if images.len() < n {
            return Err(PolyError::MissingImage(self.ring.names()[images.len()].clone()));
        }
        let target = images[0].ring().clone();
        if images[..n].iter().any(|g| *g.ring() != target) || *target.field() != *self.field() {
            return Err(PolyError::RingMismatch);
        }
        let mut cache: Vec<Vec<Polynomial>> = vec![Vec::new(); n];
        let mut terms: Vec<&Term> = self.terms.iter().collect();
        terms.sort_unstable_by(|a, b| a.mono.exps[..n].cmp(&b.mono.exps[..n]));
        Ok(subst_rec(&terms, 0, n, images, &target, &mut cache))
    }

    /// Substitution driven by variable names; every source variable needs an image.
    pub fn substitute_named(
        &self,
        images: &BTreeMap<String, Polynomial>,
    ) -> Result<Polynomial, PolyError> {
        let ordered = self
            .ring
            .names()
            .iter()
            .map(|name| images.get(name).cloned().ok_or_else(|| PolyError::MissingImage(name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        self.substitute(&ordered)
    }

    /// Rewrites every monomial through `map` into `target` (which must share
    /// the field), merging any collisions.
    pub fn map_monomials(
        &self,
        target: &Ring,
        map: impl Fn(&[u16; MAX_VARS]) -> [u16; MAX_VARS],
    ) -> Polynomial {
        assert!(target.field() == self.field(), "target ring over a different field");
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                mono: target.monomial_from_array(map(&t.mono.exps)),
                coeff: t.coeff,
            })
            .collect();
        Polynomial::from_terms(target, terms)
    }

    /// The same polynomial viewed in a ring with the same variables under a
    /// different order (or weights).
    pub fn to_ring(&self, target: &Ring) -> Result<Polynomial, PolyError> {
        if target.names() != self.ring.names() || target.field() != self.field() {
            return Err(PolyError::RingMismatch);
        }
        Ok(self.map_monomials(target, |e| *e))
    }

    /// Evaluates at a point given as raw field elements, one per variable.
    pub fn evaluate(&self, point: &[u8]) -> u8 {
        let f = self.field();
        let mut acc = 0u8;
        for t in &self.terms {
            let mut v = t.coeff;
            for (i, &x) in point.iter().enumerate().take(self.ring.nvars()) {
                let e = t.mono.exps[i];
                if e > 0 {
                    v = f.mul(v, f.pow(x, e as u64));
                }
            }
            acc = f.add(acc, v);
        }
        acc
    }

    /// Keeps only the terms of weighted degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Polynomial {
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().filter(|t| t.mono.deg == d).copied().collect(),
        }
    }
}

fn subst_rec(
    terms: &[&Term],
    var: usize,
    n: usize,
    images: &[Polynomial],
    target: &Ring,
    cache: &mut Vec<Vec<Polynomial>>,
) -> Polynomial {
    if var == n {
        let f = target.field();
        let c = terms.iter().fold(0u8, |acc, t| f.add(acc, t.coeff));
        return target.constant_raw(c);
    }
    let mut result = target.zero();
    let mut start = 0;
    while start < terms.len() {
        let e = terms[start].mono.exps[var];
        let mut end = start;
        while end < terms.len() && terms[end].mono.exps[var] == e {
            end += 1;
        }
        let inner = subst_rec(&terms[start..end], var + 1, n, images, target, cache);
        let piece = if e == 0 {
            inner
        } else {
            let powers = &mut cache[var];
            if powers.is_empty() {
                powers.push(target.one());
            }
            while powers.len() <= e as usize {
                let next = powers.last().unwrap().mul_unchecked(&images[var]);
                powers.push(next);
            }
            inner.mul_unchecked(&powers[e as usize])
        };
        result = result.merge(&piece, 1, None);
        start = end;
    }
    result
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let field = self.field();
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let mono = self.ring.format_monomial(&t.mono);
            if t.mono.is_one() {
                f.write_str(&field.format_raw(t.coeff))?;
            } else if t.coeff == 1 {
                f.write_str(&mono)?;
            } else {
                write!(f, "{}*{}", field.format_raw(t.coeff), mono)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("polynomial operands from different rings")
            }
        }
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
        impl $tr<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                self.$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, checked_add);
poly_binop!(Sub, sub, checked_sub);
poly_binop!(Mul, mul, checked_mul);

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale_raw(self.field().neg(1))
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Recursive-descent parser for the polynomial text grammar:
/// `poly := term (('+'|'-') term)*`, `term := coeff('*' varpow)* | varpow('*' varpow)*`,
/// `varpow := name('^' natural)?`.
struct Parser<'a> {
    ring: &'a Ring,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(ring: &'a Ring, text: &str) -> Self {
        Parser {
            ring,
            chars: text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(),
            pos: 0,
        }
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|(i, _)| *i).unwrap_or_else(|| {
            self.chars.last().map(|(i, c)| i + c.len_utf8()).unwrap_or(0)
        })
    }

    fn err(&self, message: &str) -> PolyError {
        PolyError::SyntaxError {
            pos: self.offset(),
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn parse(mut self) -> Result<Polynomial, PolyError> {
        let f = self.ring.field().clone();
        let mut terms = Vec::new();
        let mut sign = 1u8;
        if self.peek() == Some('-') {
            sign = f.neg(1);
            self.pos += 1;
        }
        loop {
            let t = self.term()?;
            terms.push(Term {
                mono: t.mono,
                coeff: f.mul(sign, t.coeff),
            });
            match self.peek() {
                None => break,
                Some('+') => sign = 1,
                Some('-') => sign = f.neg(1),
                Some(_) => return Err(self.err("expected `+`, `-` or end of input")),
            }
            self.pos += 1;
        }
        Ok(Polynomial::from_terms(self.ring, terms))
    }

    fn term(&mut self) -> Result<Term, PolyError> {
        let mut coeff = 1u8;
        let mut exps = [0u16; MAX_VARS];
        let mut first = true;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '[' => {
                coeff = self.coefficient()?;
                first = false;
            }
            Some(c) if c.is_ascii_alphabetic() => {}
            _ => return Err(self.err("expected a coefficient or variable")),
        }
        loop {
            if !first {
                if self.peek() != Some('*') {
                    break;
                }
                self.pos += 1;
            }
            first = false;
            let (var, e) = self.varpow()?;
            exps[var] = exps[var]
                .checked_add(e)
                .ok_or_else(|| self.err("exponent too large"))?;
        }
        Ok(Term {
            mono: self.ring.monomial_from_array(exps),
            coeff,
        })
    }

    fn coefficient(&mut self) -> Result<u8, PolyError> {
        let start = self.pos;
        if self.peek() == Some('[') {
            while self.peek().is_some_and(|c| c != ']') {
                self.pos += 1;
            }
            if self.peek() != Some(']') {
                return Err(self.err("unterminated `[`"));
            }
            self.pos += 1;
        } else {
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|(_, c)| *c).collect();
        self.ring.field().parse_raw(&text).map_err(|_| PolyError::SyntaxError {
            pos: self.chars[start].0,
            message: format!("bad coefficient `{text}`"),
        })
    }

    fn varpow(&mut self) -> Result<(usize, u16), PolyError> {
        let start = self.pos;
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            return Err(self.err("expected a variable name"));
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().map(|(_, c)| *c).collect();
        let var = self
            .ring
            .index_of(&name)
            .ok_or(PolyError::UnknownVariable(name))?;
        let mut e = 1u16;
        if self.peek() == Some('^') {
            self.pos += 1;
            let ds = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if ds == self.pos {
                return Err(self.err("expected an exponent"));
            }
            let digits: String = self.chars[ds..self.pos].iter().map(|(_, c)| *c).collect();
            e = digits.parse().map_err(|_| self.err("exponent too large"))?;
        }
        Ok((var, e))
    }
}
