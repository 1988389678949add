//! `GL_2(F_q)` acting diagonally on `R4 = F_q[x1, x2, y1, y2]`, together with
//! the Frobenius map `F*` and the involution `*`.
//!
//! Convention: `g` substitutes the column `(y1, y2)` by `g * (y1, y2)` and the
//! row `(x1, x2)` by `(x1, x2) * g^{-1}`, so `x1*y1 + x2*y2` is fixed and
//! `d2` picks up `det(g)^{-1}`. With substitution semantics the composite
//! satisfies `act(g, act(h, f)) = act(h * g, f)`.

use std::fmt;

use thiserror::Error;

use crate::gf::{FieldElement, GaloisField};
use crate::linalg::{Echelon, SparseVec};
use crate::mpoly::{Monomial, MonomialOrder, PolyError, Polynomial, Ring, MAX_VARS};

pub const R4_NAMES: [&str; 4] = ["x1", "x2", "y1", "y2"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("SingularMatrix")]
    SingularMatrix,
    #[error("RingMismatch: expected a polynomial in x1, x2, y1, y2 over {0}")]
    RingMismatch(String),
    #[error("invalid matrix literal `{0}`")]
    BadMatrix(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The ring `F_q[x1, x2, y1, y2]` with standard grading and grevlex order.
pub fn r4(field: &GaloisField) -> Ring {
    Ring::new(field.clone(), &R4_NAMES, None, MonomialOrder::GRevLex).expect("valid ring")
}

fn check_r4(f: &Polynomial) -> Result<(), ActionError> {
    let ring = f.ring();
    if ring.nvars() != 4 || ring.names().iter().zip(R4_NAMES).any(|(a, b)| a != b) {
        return Err(ActionError::RingMismatch(ring.field().to_string()));
    }
    Ok(())
}

/// An invertible 2x2 matrix over GF(q), entries stored row-major as raw elements.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupElement {
    field: GaloisField,
    m: [u8; 4],
}

impl GroupElement {
    pub fn new(field: &GaloisField, entries: [u8; 4]) -> Result<Self, ActionError> {
        let g = GroupElement {
            field: field.clone(),
            m: entries,
        };
        if g.det_raw() == 0 {
            return Err(ActionError::SingularMatrix);
        }
        Ok(g)
    }

    pub fn from_elements(entries: [[FieldElement; 2]; 2]) -> Result<Self, ActionError> {
        let field = entries[0][0].field().clone();
        let raw = [
            entries[0][0].raw(),
            entries[0][1].raw(),
            entries[1][0].raw(),
            entries[1][1].raw(),
        ];
        if entries.iter().flatten().any(|e| *e.field() != field) {
            return Err(ActionError::BadMatrix("entries from different fields".into()));
        }
        Self::new(&field, raw)
    }

    pub fn identity(field: &GaloisField) -> Self {
        GroupElement {
            field: field.clone(),
            m: [1, 0, 0, 1],
        }
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn entry(&self, row: usize, col: usize) -> FieldElement {
        self.field.element(self.m[row * 2 + col])
    }

    fn det_raw(&self) -> u8 {
        let f = &self.field;
        f.sub(f.mul(self.m[0], self.m[3]), f.mul(self.m[1], self.m[2]))
    }

    pub fn det(&self) -> FieldElement {
        self.field.element(self.det_raw())
    }

    pub fn inverse(&self) -> GroupElement {
        let f = &self.field;
        let inv = f.inv(self.det_raw()).expect("group elements are invertible");
        let [a, b, c, d] = self.m;
        GroupElement {
            field: f.clone(),
            m: [f.mul(d, inv), f.mul(f.neg(b), inv), f.mul(f.neg(c), inv), f.mul(a, inv)],
        }
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let f = &self.field;
        let [a, b, c, d] = self.m;
        let [e, g, h, k] = other.m;
        GroupElement {
            field: f.clone(),
            m: [
                f.add(f.mul(a, e), f.mul(b, h)),
                f.add(f.mul(a, g), f.mul(b, k)),
                f.add(f.mul(c, e), f.mul(d, h)),
                f.add(f.mul(c, g), f.mul(d, k)),
            ],
        }
    }

    /// Images of `x1, x2, y1, y2` under this element.
    pub fn images(&self, ring: &Ring) -> Vec<Polynomial> {
        let inv = self.inverse().m;
        let lin = |a: u8, i: usize, b: u8, j: usize| -> Polynomial {
            ring.var(i).scale_raw(a).add_scaled(b, None, &ring.var(j))
        };
        vec![
            lin(inv[0], 0, inv[2], 1),
            lin(inv[1], 0, inv[3], 1),
            lin(self.m[0], 2, self.m[1], 3),
            lin(self.m[2], 2, self.m[3], 3),
        ]
    }

    /// Parses `[[a,b],[c,d]]` with field element literals.
    pub fn parse(field: &GaloisField, text: &str) -> Result<Self, ActionError> {
        let bad = || ActionError::BadMatrix(text.to_string());
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let unwrap = |s: &str| s.strip_prefix('[').and_then(|s| s.strip_suffix(']')).map(str::to_string);
        let inner = unwrap(&compact).ok_or_else(bad)?;
        let rows: Vec<String> = split_top_level(&inner)
            .into_iter()
            .map(|r| unwrap(r).ok_or_else(bad))
            .collect::<Result<_, _>>()?;
        if rows.len() != 2 {
            return Err(bad());
        }
        let mut raw = [0u8; 4];
        for (r, row) in rows.iter().enumerate() {
            let cells = split_top_level(row);
            if cells.len() != 2 {
                return Err(bad());
            }
            for (c, cell) in cells.iter().enumerate() {
                raw[r * 2 + c] = field.parse_raw(cell).map_err(|_| bad())?;
            }
        }
        Self::new(field, raw)
    }
}

/// Splits on commas that are not inside brackets.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = |i: usize| self.field.format_raw(self.m[i]);
        write!(f, "[[{},{}],[{},{}]]", e(0), e(1), e(2), e(3))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Every invertible 2x2 matrix over the field, in lexicographic order of entries.
pub fn enumerate_gl2(field: &GaloisField) -> Vec<GroupElement> {
    let q = field.q() as usize;
    let mut out = Vec::with_capacity((q * q - 1) * (q * q - q));
    for code in 0..q.pow(4) {
        let entries = [
            (code / (q * q * q)) as u8,
            (code / (q * q) % q) as u8,
            (code / q % q) as u8,
            (code % q) as u8,
        ];
        if let Ok(g) = GroupElement::new(field, entries) {
            out.push(g);
        }
    }
    out
}

pub fn enumerate_sl2(field: &GaloisField) -> Vec<GroupElement> {
    enumerate_gl2(field).into_iter().filter(|g| g.det_raw() == 1).collect()
}

/// `{[[1,1],[0,1]], [[z,0],[0,1]], [[0,1],[1,0]]}` with `z` primitive; these
/// generate `GL_2(F_q)`.
pub fn gl2_generators(field: &GaloisField) -> Vec<GroupElement> {
    let z = field.primitive_element().raw();
    vec![
        GroupElement::new(field, [1, 1, 0, 1]).unwrap(),
        GroupElement::new(field, [z, 0, 0, 1]).unwrap(),
        GroupElement::new(field, [0, 1, 1, 0]).unwrap(),
    ]
}

/// The image of `f` under `g`.
pub fn act(g: &GroupElement, f: &Polynomial) -> Result<Polynomial, ActionError> {
    check_r4(f)?;
    if g.field() != f.field() {
        return Err(ActionError::RingMismatch(f.field().to_string()));
    }
    Ok(f.substitute(&g.images(f.ring()))?)
}

/// `F*`: fixes `x1, x2` and raises `y1, y2` to the q-th power.
pub fn frobenius_star(f: &Polynomial) -> Result<Polynomial, ActionError> {
    check_r4(f)?;
    let q = f.field().q() as u16;
    Ok(f.map_monomials(f.ring(), |e| {
        let mut out = *e;
        out[2] = e[2].checked_mul(q).expect("exponent overflow");
        out[3] = e[3].checked_mul(q).expect("exponent overflow");
        out
    }))
}

/// `*`: `x1 <-> y2`, `x2 <-> y1`.
pub fn involution_star(f: &Polynomial) -> Result<Polynomial, ActionError> {
    check_r4(f)?;
    Ok(f.map_monomials(f.ring(), |e| {
        let mut out = [0u16; MAX_VARS];
        out[0] = e[3];
        out[1] = e[2];
        out[2] = e[1];
        out[3] = e[0];
        out
    }))
}

/// First group element moving `f`, if any, with the difference `g.f - f`.
pub fn find_moving(
    f: &Polynomial,
    group: &[GroupElement],
) -> Result<Option<(GroupElement, Polynomial)>, ActionError> {
    for g in group {
        let image = act(g, f)?;
        if image != *f {
            return Ok(Some((g.clone(), image - f)));
        }
    }
    Ok(None)
}

pub fn is_invariant(f: &Polynomial, group: &[GroupElement]) -> Result<bool, ActionError> {
    Ok(find_moving(f, group)?.is_none())
}

/// Applies a fixed group element to many monomials, caching the powers of
/// the four linear images.
struct MonomialAction {
    images: Vec<Polynomial>,
    powers: Vec<Vec<Polynomial>>,
}

impl MonomialAction {
    fn new(g: &GroupElement, ring: &Ring) -> Self {
        let images = g.images(ring);
        let powers = images.iter().map(|p| vec![ring.one(), p.clone()]).collect();
        MonomialAction { images, powers }
    }

    fn power(&mut self, var: usize, e: u16) -> &Polynomial {
        let cache = &mut self.powers[var];
        while cache.len() <= e as usize {
            let next = cache.last().unwrap() * &self.images[var];
            cache.push(next);
        }
        &cache[e as usize]
    }

    fn apply(&mut self, m: &Monomial) -> Polynomial {
        let mut acc = self.power(0, m.exponent(0)).clone();
        for v in 1..4 {
            let e = m.exponent(v);
            if e > 0 {
                acc = &acc * self.power(v, e);
            }
        }
        acc
    }
}

/// Dimension of the degree-`d` invariants of `group` in R4: the kernel of
/// the stacked maps `g - 1` on the monomial basis of that degree.
pub fn invariant_dimension(field: &GaloisField, group: &[GroupElement], d: u32) -> usize {
    let ring = r4(field);
    let monomials = ring.monomials_of_degree(d);
    let n = monomials.len();
    let index: rustc_hash::FxHashMap<Monomial, u32> = monomials
        .iter()
        .enumerate()
        .map(|(i, m)| (*m, i as u32))
        .collect();
    let mut actions: Vec<MonomialAction> = group.iter().map(|g| MonomialAction::new(g, &ring)).collect();
    let mut echelon = Echelon::new(field, false);
    let minus_one = field.neg(1);
    for (j, m) in monomials.iter().enumerate() {
        let mut column: SparseVec = Vec::new();
        for (k, action) in actions.iter_mut().enumerate() {
            let image = action.apply(m);
            let diff = image.add_scaled(minus_one, None, &ring.term(1, *m));
            let base = (k * n) as u32;
            let mut part: SparseVec = diff
                .terms()
                .iter()
                .map(|t| (base + index[&t.mono], t.coeff))
                .collect();
            part.sort_unstable_by_key(|e| e.0);
            column.extend(part);
        }
        echelon.insert(column, j as u32);
    }
    n - echelon.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        for (q, gl, sl) in [(2, 6, 6), (3, 48, 24), (4, 180, 60), (5, 480, 120)] {
            let f = GaloisField::of_order(q).unwrap();
            assert_eq!(enumerate_gl2(&f).len(), gl);
            assert_eq!(enumerate_sl2(&f).len(), sl);
        }
    }

    #[test]
    fn inverse_and_composition() {
        let f = GaloisField::of_order(4).unwrap();
        for g in enumerate_gl2(&f).iter().step_by(7) {
            assert_eq!(g.compose(&g.inverse()), GroupElement::identity(&f));
        }
    }

    #[test]
    fn matrix_literals() {
        let f = GaloisField::of_order(4).unwrap();
        let g = GroupElement::parse(&f, "[[ [t], 1 ],[0,[t+1]]]").unwrap();
        assert_eq!(g.to_string(), "[[[t],[1]],[[0],[t+1]]]");
        assert_eq!(GroupElement::parse(&f, &g.to_string()).unwrap(), g);
        assert_eq!(
            GroupElement::parse(&f, "[[1,1],[1,1]]"),
            Err(ActionError::SingularMatrix)
        );
    }

    #[test]
    fn u0_is_fixed_and_d2_scales_by_inverse_det() {
        for q in [2, 3, 4] {
            let f = GaloisField::of_order(q).unwrap();
            let r = r4(&f);
            let u0 = r.parse("x1*y1 + x2*y2").unwrap();
            let d2 = r.var(0) * r.var(1).pow(q) - r.var(0).pow(q) * r.var(1);
            for g in enumerate_gl2(&f) {
                assert_eq!(act(&g, &u0).unwrap(), u0);
                let dinv = g.det().inv().unwrap();
                assert_eq!(act(&g, &d2).unwrap(), d2.scale(&dinv));
            }
        }
    }

    #[test]
    fn d2_is_moved_over_gf3() {
        let f = GaloisField::of_order(3).unwrap();
        let r = r4(&f);
        let d2 = r.var(0) * r.var(1).pow(3) - r.var(0).pow(3) * r.var(1);
        assert!(!is_invariant(&d2, &enumerate_gl2(&f)).unwrap());
        assert!(is_invariant(&d2, &enumerate_sl2(&f)).unwrap());
    }

    #[test]
    fn star_maps() {
        let f = GaloisField::of_order(3).unwrap();
        let r = r4(&f);
        let u0 = r.parse("x1*y1 + x2*y2").unwrap();
        assert_eq!(frobenius_star(&u0).unwrap(), r.parse("x1*y1^3 + x2*y2^3").unwrap());
        assert_eq!(frobenius_star(&r.var(0)).unwrap(), r.var(0));
        let um1 = r.parse("x1*y1^3 + x2*y2^3").unwrap();
        assert_eq!(involution_star(&um1).unwrap(), r.parse("x1^3*y1 + x2^3*y2").unwrap());
    }

    #[test]
    fn rejects_other_rings() {
        let f = GaloisField::of_order(2).unwrap();
        let s = Ring::new(f.clone(), &["a", "b", "c", "d"], None, MonomialOrder::GRevLex).unwrap();
        assert!(matches!(involution_star(&s.var(0)), Err(ActionError::RingMismatch(_))));
        assert!(matches!(
            act(&GroupElement::identity(&f), &s.var(0)),
            Err(ActionError::RingMismatch(_))
        ));
    }

    #[test]
    fn small_invariant_dimensions() {
        let f = GaloisField::of_order(2).unwrap();
        let g = gl2_generators(&f);
        assert_eq!(invariant_dimension(&f, &g, 0), 1);
        assert_eq!(invariant_dimension(&f, &g, 1), 0);
        // u0, c1, c1* span degree 2 over GF(2).
        assert_eq!(invariant_dimension(&f, &g, 2), 3);
    }

    #[test]
    fn generating_set_matches_full_group() {
        for q in [2, 3] {
            let f = GaloisField::of_order(q).unwrap();
            let full = enumerate_gl2(&f);
            let gens = gl2_generators(&f);
            for d in 0..=10 {
                assert_eq!(
                    invariant_dimension(&f, &full, d),
                    invariant_dimension(&f, &gens, d),
                    "q = {q}, d = {d}"
                );
            }
        }
    }
}
