//! Exact arithmetic in GF(p^s) for the small fields the workbench runs over.
//!
//! Elements are encoded as integers `c_0 + c_1 p + ... + c_{s-1} p^{s-1}` where
//! `c_i` are the coordinates in the basis `1, t, ..., t^{s-1}`. All arithmetic
//! goes through `q x q` tables built once when the field is constructed, so a
//! field is cheap to clone (it is an `Arc`) and every operation is a lookup.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

/// Largest field order supported by the table representation.
pub const MAX_ORDER: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("NotPrime: {0} is not prime")]
    NotPrime(u32),
    #[error("NotPrimePower: {0} is not a prime power")]
    NotPrimePower(u32),
    #[error("Reducible: modulus {0} is reducible over the prime field")]
    Reducible(String),
    #[error("UnsupportedSize: no built-in modulus for GF({p}^{s}) and none was given")]
    UnsupportedSize { p: u32, s: u32 },
    #[error("invalid modulus `{0}`")]
    BadModulus(String),
    #[error("FieldMismatch: operands belong to different fields")]
    FieldMismatch,
    #[error("DivisionByZero")]
    DivisionByZero,
    #[error("invalid field element literal `{0}`")]
    BadLiteral(String),
}

/// Built-in irreducible moduli, coefficients listed from the constant term up.
const MODULUS_TABLE: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),       // t^2 + t + 1
    (2, 3, &[1, 1, 0, 1]),    // t^3 + t + 1
    (3, 2, &[1, 0, 1]),       // t^2 + 1, so t^2 = -1
    (2, 4, &[1, 1, 0, 0, 1]), // t^4 + t + 1
    (5, 2, &[2, 4, 1]),       // t^2 + 4t + 2
    (3, 3, &[1, 2, 0, 1]),    // t^3 + 2t + 1
];

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q = p^s`, or `None` when `q` is not a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut rest = q;
    let mut s = 0;
    while rest % p == 0 {
        rest /= p;
        s += 1;
    }
    (rest == 1).then_some((p, s))
}

/// A validated finite field descriptor together with its arithmetic tables.
#[derive(Clone)]
pub struct GaloisField(Arc<FieldData>);

struct FieldData {
    p: u32,
    s: u32,
    q: u32,
    /// Monic modulus, constant term first; `[0, 1]` for prime fields.
    modulus: Vec<u32>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    frob: Vec<u8>,
}

impl GaloisField {
    /// Builds GF(p^s). For `s > 1` the modulus is taken from `modulus` (a
    /// polynomial in `t`, e.g. `"t^2+t+1"`) or else from the built-in table.
    pub fn new(p: u32, s: u32, modulus: Option<&str>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if s == 0 {
            return Err(FieldError::UnsupportedSize { p, s });
        }
        let q = p
            .checked_pow(s)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or(FieldError::UnsupportedSize { p, s })?;
        let modulus = if s == 1 {
            vec![0, 1]
        } else if let Some(text) = modulus {
            let coeffs = parse_univariate(text, 't')
                .ok_or_else(|| FieldError::BadModulus(text.to_string()))?;
            let coeffs: Vec<u32> = coeffs
                .iter()
                .map(|&c| c.rem_euclid(p as i64) as u32)
                .collect();
            let coeffs = trim(coeffs);
            if coeffs.len() != s as usize + 1 || coeffs[s as usize] != 1 {
                return Err(FieldError::BadModulus(text.to_string()));
            }
            if !is_irreducible(&coeffs, p) {
                return Err(FieldError::Reducible(text.to_string()));
            }
            coeffs
        } else {
            let entry = MODULUS_TABLE
                .iter()
                .find(|(tp, ts, _)| *tp == p && *ts == s)
                .ok_or(FieldError::UnsupportedSize { p, s })?;
            debug_assert!(is_irreducible(entry.2, p));
            entry.2.to_vec()
        };
        Ok(Self(Arc::new(FieldData::build(p, s, q, modulus))))
    }

    /// Builds the field of order `q` with the built-in modulus.
    pub fn of_order(q: u32) -> Result<Self, FieldError> {
        let (p, s) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        Self::new(p, s, None)
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn s(&self) -> u32 {
        self.0.s
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    /// Monic modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.s == 1
    }

    /// The defining polynomial in `t`, e.g. `t^2 + t + 1`; `t` for prime fields.
    pub fn modulus_text(&self) -> String {
        format_univariate(&self.0.modulus)
    }

    #[inline]
    fn idx(&self, a: u8, b: u8) -> usize {
        a as usize * self.0.q as usize + b as usize
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.0.add[self.idx(a, b)]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.0.add[self.idx(a, self.0.neg[b as usize])]
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.0.mul[self.idx(a, b)]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.0.neg[a as usize]
    }

    /// Inverse of a raw element; `None` for zero.
    #[inline]
    pub fn inv(&self, a: u8) -> Option<u8> {
        (a != 0).then(|| self.0.inv[a as usize])
    }

    pub fn pow(&self, a: u8, mut n: u64) -> u8 {
        let mut base = a;
        let mut acc = 1u8;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    #[inline]
    pub fn frobenius(&self, a: u8) -> u8 {
        self.0.frob[a as usize]
    }

    /// Raw encoding of the image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> u8 {
        n.rem_euclid(self.0.p as i64) as u8
    }

    pub fn element(&self, raw: u8) -> FieldElement {
        assert!((raw as u32) < self.0.q, "raw value {raw} outside GF({})", self.0.q);
        FieldElement {
            field: self.clone(),
            value: raw,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// The class of `t`; equals 1 in a prime field.
    pub fn generator(&self) -> FieldElement {
        if self.is_prime_field() {
            self.one()
        } else {
            self.element(self.0.p as u8)
        }
    }

    /// Smallest raw element of multiplicative order `q - 1`.
    pub fn primitive_element(&self) -> FieldElement {
        let q = self.0.q as u64;
        let raw = (1..self.0.q as u8)
            .find(|&a| (1..q - 1).all(|k| self.pow(a, k) != 1))
            .expect("every finite field has a primitive element");
        self.element(raw)
    }

    /// All `q` elements in encoding order: `0, 1, ..., p-1, t, t+1, ...`.
    pub fn elements(&self) -> Vec<FieldElement> {
        (0..self.0.q).map(|v| self.element(v as u8)).collect()
    }

    /// Coordinates of a raw element in the basis `1, t, ..., t^{s-1}`.
    pub fn coords(&self, raw: u8) -> Vec<u32> {
        let mut v = raw as u32;
        (0..self.0.s)
            .map(|_| {
                let c = v % self.0.p;
                v /= self.0.p;
                c
            })
            .collect()
    }

    pub fn format_raw(&self, raw: u8) -> String {
        if self.is_prime_field() {
            return raw.to_string();
        }
        let coords = self.coords(raw);
        let mut parts = Vec::new();
        for (k, &c) in coords.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let part = match (k, c) {
                (0, c) => c.to_string(),
                (1, 1) => "t".to_string(),
                (1, c) => format!("{c}*t"),
                (k, 1) => format!("t^{k}"),
                (k, c) => format!("{c}*t^{k}"),
            };
            parts.push(part);
        }
        if parts.is_empty() {
            parts.push("0".to_string());
        }
        format!("[{}]", parts.join("+"))
    }

    /// Parses a decimal residue or a bracketed polynomial in `t`.
    pub fn parse_raw(&self, text: &str) -> Result<u8, FieldError> {
        let text = text.trim();
        let bad = || FieldError::BadLiteral(text.to_string());
        if let Some(inner) = text.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or_else(bad)?;
            let coeffs = parse_univariate(inner, 't').ok_or_else(bad)?;
            Ok(self.reduce_coeffs(&coeffs))
        } else {
            if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let n: i64 = text.parse().map_err(|_| bad())?;
            Ok(self.from_int(n))
        }
    }

    pub fn parse(&self, text: &str) -> Result<FieldElement, FieldError> {
        self.parse_raw(text).map(|raw| self.element(raw))
    }

    /// Reduces integer coefficients (constant term first) modulo p and the modulus.
    fn reduce_coeffs(&self, coeffs: &[i64]) -> u8 {
        let p = self.0.p;
        let mut c: Vec<u32> = coeffs.iter().map(|&x| x.rem_euclid(p as i64) as u32).collect();
        let s = self.0.s as usize;
        let m = &self.0.modulus;
        while c.len() > s {
            let lead = c.pop().unwrap();
            if lead == 0 {
                continue;
            }
            let shift = c.len() - s;
            for (i, &mi) in m[..s].iter().enumerate() {
                c[shift + i] = (c[shift + i] + (p - mi) * lead) % p;
            }
        }
        encode(&c, p)
    }
}

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for GaloisField {}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_prime_field() {
            write!(f, "GF({})", self.0.p)
        } else {
            write!(f, "GF({}^{}; {})", self.0.p, self.0.s, format_univariate(&self.0.modulus))
        }
    }
}

impl FieldData {
    fn build(p: u32, s: u32, q: u32, modulus: Vec<u32>) -> Self {
        let qs = q as usize;
        let coords: Vec<Vec<u32>> = (0..q)
            .map(|v| {
                let mut v = v;
                (0..s)
                    .map(|_| {
                        let c = v % p;
                        v /= p;
                        c
                    })
                    .collect()
            })
            .collect();
        let mut add = vec![0u8; qs * qs];
        let mut mul = vec![0u8; qs * qs];
        for a in 0..qs {
            for b in 0..qs {
                let sum: Vec<u32> = coords[a].iter().zip(&coords[b]).map(|(x, y)| (x + y) % p).collect();
                add[a * qs + b] = encode(&sum, p);
                mul[a * qs + b] = mul_mod(&coords[a], &coords[b], &modulus, p);
            }
        }
        let neg: Vec<u8> = (0..qs)
            .map(|a| {
                let n: Vec<u32> = coords[a].iter().map(|x| (p - x) % p).collect();
                encode(&n, p)
            })
            .collect();
        let mut inv = vec![0u8; qs];
        for a in 1..qs {
            inv[a] = (1..qs).find(|&b| mul[a * qs + b] == 1).expect("field has inverses") as u8;
        }
        let frob: Vec<u8> = (0..qs)
            .map(|a| {
                let mut acc = 1u8;
                for _ in 0..p {
                    acc = mul[acc as usize * qs + a];
                }
                acc
            })
            .collect();
        FieldData {
            p,
            s,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
            frob,
        }
    }
}

fn encode(coords: &[u32], p: u32) -> u8 {
    coords.iter().rev().fold(0u32, |acc, &c| acc * p + c) as u8
}

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

/// Product of two coordinate vectors reduced by the monic modulus.
fn mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> u8 {
    let s = modulus.len() - 1;
    let mut prod = vec![0u32; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&mut prod, modulus, p);
    prod.truncate(s);
    encode(&prod, p)
}

/// In-place remainder of `a` modulo the monic `m` over GF(p).
fn poly_rem(a: &mut Vec<u32>, m: &[u32], p: u32) {
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = a.pop().unwrap();
        if lead == 0 {
            continue;
        }
        let shift = a.len() - dm;
        for (i, &mi) in m[..dm].iter().enumerate() {
            a[shift + i] = (a[shift + i] + (p - mi) * lead) % p;
        }
    }
}

/// Brute-force irreducibility: no monic factor of degree `1..=deg/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let deg = modulus.len() - 1;
    if deg == 0 {
        return false;
    }
    for k in 1..=deg / 2 {
        let count = (p as usize).pow(k as u32);
        for code in 0..count {
            let mut g: Vec<u32> = Vec::with_capacity(k + 1);
            let mut c = code;
            for _ in 0..k {
                g.push((c % p as usize) as u32);
                c /= p as usize;
            }
            g.push(1);
            let mut r = modulus.to_vec();
            poly_rem(&mut r, &g, p);
            if r.iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

/// Parses `c*t^k + ...` with integer coefficients; constant term first in the result.
fn parse_univariate(text: &str, var: char) -> Option<Vec<i64>> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let mut coeffs: Vec<i64> = Vec::new();
    let bytes: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut first = true;
    while i < bytes.len() {
        let mut sign = 1i64;
        if bytes[i] == '+' || bytes[i] == '-' {
            if bytes[i] == '-' {
                sign = -1;
            }
            i += 1;
        } else if !first {
            return None;
        }
        first = false;
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let mut coeff: i64 = if i > start {
            bytes[start..i].iter().collect::<String>().parse().ok()?
        } else {
            1
        };
        let mut power = 0usize;
        let had_number = i > start;
        if i < bytes.len() && bytes[i] == '*' {
            if !had_number {
                return None;
            }
            i += 1;
            if i >= bytes.len() || bytes[i] != var {
                return None;
            }
        }
        if i < bytes.len() && bytes[i] == var {
            i += 1;
            power = 1;
            if i < bytes.len() && bytes[i] == '^' {
                i += 1;
                let ps = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if ps == i {
                    return None;
                }
                power = bytes[ps..i].iter().collect::<String>().parse().ok()?;
            }
        } else if !had_number {
            return None;
        }
        coeff *= sign;
        if coeffs.len() <= power {
            coeffs.resize(power + 1, 0);
        }
        coeffs[power] += coeff;
    }
    Some(coeffs)
}

fn format_univariate(coeffs: &[u32]) -> String {
    let mut parts = Vec::new();
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        parts.push(match (k, c) {
            (0, c) => c.to_string(),
            (1, 1) => "t".into(),
            (1, c) => format!("{c}*t"),
            (k, 1) => format!("t^{k}"),
            (k, c) => format!("{c}*t^{k}"),
        });
    }
    parts.join("+")
}

/// An element of a particular field. Comparisons and arithmetic between
/// elements of different fields are errors (or panics for the operator forms).
#[derive(Clone)]
pub struct FieldElement {
    field: GaloisField,
    value: u8,
}

impl FieldElement {
    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn raw(&self) -> u8 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn coords(&self) -> Vec<u32> {
        self.field.coords(self.value)
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.field.element(self.field.add(self.value, other.value)))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.field.element(self.field.sub(self.value, other.value)))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.field.element(self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        self.field
            .inv(self.value)
            .map(|v| self.field.element(v))
            .ok_or(FieldError::DivisionByZero)
    }

    /// `self^n`, with `0^0 = 1`.
    pub fn pow(&self, n: u64) -> Self {
        self.field.element(self.field.pow(self.value, n))
    }

    /// The p-th power map.
    pub fn frobenius(&self) -> Self {
        self.field.element(self.field.frobenius(self.value))
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.field == other.field
    }
}

impl Eq for FieldElement {}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format_raw(self.value))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self, self.field)
    }
}

macro_rules! forward_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field element operands from different fields")
            }
        }
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.field.element(self.field.neg(self.value))
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf4() -> GaloisField {
        GaloisField::new(2, 2, Some("t^2+t+1")).unwrap()
    }

    #[test]
    fn prime_field_basics() {
        let f = GaloisField::new(2, 1, None).unwrap();
        assert_eq!(f.elements().len(), 2);
        assert!((f.one() + f.one()).is_zero());
        let f3 = GaloisField::new(3, 1, None).unwrap();
        let two = f3.element(2);
        assert_eq!(&two * &two, f3.one());
        assert_eq!(two.inv().unwrap(), two);
        let f5 = GaloisField::new(5, 1, None).unwrap();
        assert_eq!(f5.element(2).pow(4), f5.one());
    }

    #[test]
    fn gf4_table() {
        let f = gf4();
        let t = f.generator();
        let t1 = &t + &f.one();
        assert_eq!(&t * &t, t1);
        assert_eq!(&t * &t1, f.one());
        assert_eq!(t.inv().unwrap(), t1);
        assert_eq!(t.pow(4), t);
        assert_eq!(t.frobenius(), t1);
        let shown: Vec<String> = f.elements().iter().map(|e| e.to_string()).collect();
        assert_eq!(shown, ["[0]", "[1]", "[t]", "[t+1]"]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(GaloisField::new(4, 1, None).err(), Some(FieldError::NotPrime(4)));
        assert!(matches!(
            GaloisField::new(2, 2, Some("t^2+1")),
            Err(FieldError::Reducible(_))
        ));
        assert!(matches!(
            GaloisField::new(7, 2, None),
            Err(FieldError::UnsupportedSize { .. })
        ));
        assert_eq!(GaloisField::of_order(6).err(), Some(FieldError::NotPrimePower(6)));
        assert!(GaloisField::new(7, 2, Some("t^2+1")).is_ok());
    }

    #[test]
    fn zero_has_no_inverse() {
        for q in [2, 3, 4, 9] {
            let f = GaloisField::of_order(q).unwrap();
            assert_eq!(f.zero().inv(), Err(FieldError::DivisionByZero));
            assert_eq!(f.zero().pow(0), f.one());
        }
    }

    #[test]
    fn mismatched_fields() {
        let a = GaloisField::of_order(3).unwrap().one();
        let b = GaloisField::of_order(5).unwrap().one();
        assert_eq!(a.checked_add(&b), Err(FieldError::FieldMismatch));
    }

    #[test]
    fn gf9_frobenius_is_an_involution() {
        let f = GaloisField::of_order(9).unwrap();
        let t = f.generator();
        assert_eq!(t.pow(2), -f.one());
        for a in f.elements() {
            assert_eq!(a.frobenius().frobenius(), a);
        }
    }

    #[test]
    fn literals_round_trip() {
        for q in [2, 3, 4, 8, 9, 16, 25, 27] {
            let f = GaloisField::of_order(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.parse(&a.to_string()).unwrap(), a);
            }
        }
        let f = gf4();
        assert_eq!(f.parse("[t^2]").unwrap(), f.parse("[t+1]").unwrap());
        assert!(f.parse("t").is_err());
        assert!(f.parse("[x]").is_err());
    }

    #[test]
    fn builtin_moduli_are_irreducible() {
        for (p, _, m) in MODULUS_TABLE {
            assert!(is_irreducible(m, *p));
        }
    }
}
