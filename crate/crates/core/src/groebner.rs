//! Buchberger's algorithm with optional degree truncation and cofactor
//! tracking, normal forms, ideal membership and Hilbert functions of
//! quotients by counting standard monomials.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use rustc_hash::FxHashSet;
use thiserror::Error;

use crate::mpoly::{Monomial, MonomialOrder, Polynomial, Ring, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroebnerError {
    #[error("RingMismatch")]
    RingMismatch,
    #[error("InhomogeneousWithTruncation")]
    InhomogeneousWithTruncation,
    #[error("Timeout")]
    Timeout,
    #[error("DegreeBoundExceeded: degree {degree} above bound {bound}")]
    DegreeBoundExceeded { degree: u32, bound: u32 },
    #[error("basis was computed without cofactor tracking")]
    NotTracked,
    #[error("no generators given")]
    Empty,
}

#[derive(Debug, Clone, Default)]
pub struct BuchbergerOptions {
    /// Ignore S-pairs and generators of weighted degree above this bound.
    pub degree_bound: Option<u32>,
    pub deadline: Option<Instant>,
    /// Record every basis element as a combination of the generators.
    pub track_cofactors: bool,
}

/// Bit signature used to rule out divisibility quickly: for each of the
/// first eight variables, bits for exponent >= 1, 2, 4, 8.
fn divmask(m: &Monomial) -> u32 {
    let mut mask = 0u32;
    for (v, &e) in m.exponents().iter().take(8).enumerate() {
        let b = v * 4;
        if e >= 1 {
            mask |= 1 << b;
        }
        if e >= 2 {
            mask |= 1 << (b + 1);
        }
        if e >= 4 {
            mask |= 1 << (b + 2);
        }
        if e >= 8 {
            mask |= 1 << (b + 3);
        }
    }
    mask
}

#[derive(Debug, Clone)]
pub struct GroebnerBasis {
    ring: Ring,
    generators: Vec<Polynomial>,
    elements: Vec<Polynomial>,
    lms: Vec<Monomial>,
    masks: Vec<u32>,
    cofactors: Option<Vec<Vec<Polynomial>>>,
    degree_bound: Option<u32>,
}

/// Result of reducing a polynomial: the remainder and, per basis element,
/// the quotient terms used.
struct Reduction {
    remainder: Polynomial,
    quotients: Vec<Vec<Term>>,
}

impl GroebnerBasis {
    fn empty(ring: &Ring, generators: Vec<Polynomial>, opts: &BuchbergerOptions) -> Self {
        GroebnerBasis {
            ring: ring.clone(),
            generators,
            elements: Vec::new(),
            lms: Vec::new(),
            masks: Vec::new(),
            cofactors: opts.track_cofactors.then(Vec::new),
            degree_bound: opts.degree_bound,
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn order(&self) -> MonomialOrder {
        self.ring.order()
    }

    pub fn elements(&self) -> &[Polynomial] {
        &self.elements
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn leading_monomials(&self) -> &[Monomial] {
        &self.lms
    }

    pub fn degree_bound(&self) -> Option<u32> {
        self.degree_bound
    }

    pub fn is_tracked(&self) -> bool {
        self.cofactors.is_some()
    }

    /// Coefficients writing element `k` in the generators.
    pub fn element_cofactors(&self, k: usize) -> Option<&[Polynomial]> {
        self.cofactors.as_ref().map(|c| c[k].as_slice())
    }

    fn push(&mut self, poly: Polynomial, cof: Option<Vec<Polynomial>>) {
        let lm = *poly.leading_monomial().expect("nonzero");
        self.masks.push(divmask(&lm));
        self.lms.push(lm);
        self.elements.push(poly);
        if let (Some(all), Some(c)) = (self.cofactors.as_mut(), cof) {
            all.push(c);
        }
    }

    fn find_divisor(&self, m: &Monomial, skip: Option<usize>) -> Option<usize> {
        let mask = divmask(m);
        (0..self.lms.len()).find(|&k| {
            Some(k) != skip && self.masks[k] & !mask == 0 && self.lms[k].divides(m)
        })
    }

    /// Full reduction of `f` by the current elements, optionally skipping one.
    fn reduce(
        &self,
        f: Polynomial,
        skip: Option<usize>,
        track: bool,
        deadline: Option<Instant>,
    ) -> Result<Reduction, GroebnerError> {
        let field = self.ring.field().clone();
        let mut work = f;
        let mut rem: Vec<Term> = Vec::new();
        let mut quotients = if track { vec![Vec::new(); self.elements.len()] } else { Vec::new() };
        let mut steps = 0u32;
        while let Some(lt) = work.leading_term().copied() {
            steps += 1;
            if steps % 512 == 0 {
                if let Some(d) = deadline {
                    if Instant::now() > d {
                        return Err(GroebnerError::Timeout);
                    }
                }
            }
            match self.find_divisor(&lt.mono, skip) {
                Some(k) => {
                    let m = lt.mono.div(&self.lms[k]).expect("divisor");
                    work = work.add_scaled(field.neg(lt.coeff), Some(&m), &self.elements[k]);
                    if track {
                        quotients[k].push(Term {
                            mono: m,
                            coeff: lt.coeff,
                        });
                    }
                }
                None => {
                    rem.push(lt);
                    work.pop_leading();
                }
            }
        }
        Ok(Reduction {
            remainder: Polynomial::from_sorted_terms(&self.ring, rem),
            quotients,
        })
    }

    /// `Σ_k quotient_k * cofactor_k`, one polynomial per generator.
    fn combine(&self, quotients: &[Vec<Term>]) -> Vec<Polynomial> {
        let cofs = self.cofactors.as_ref().expect("tracked");
        let mut acc = vec![self.ring.zero(); self.generators.len()];
        for (k, terms) in quotients.iter().enumerate() {
            if terms.is_empty() {
                continue;
            }
            let qk = Polynomial::from_sorted_terms(&self.ring, terms.clone());
            for (a, c) in acc.iter_mut().zip(&cofs[k]) {
                if !c.is_zero() {
                    *a = &*a + &(&qk * c);
                }
            }
        }
        acc
    }

    fn convert(&self, f: &Polynomial) -> Result<Polynomial, GroebnerError> {
        if f.ring() == &self.ring {
            return Ok(f.clone());
        }
        if f.ring().weights() != self.ring.weights() {
            return Err(GroebnerError::RingMismatch);
        }
        f.to_ring(&self.ring).map_err(|_| GroebnerError::RingMismatch)
    }

    pub fn normal_form(&self, f: &Polynomial) -> Result<Polynomial, GroebnerError> {
        let f = self.convert(f)?;
        Ok(self.reduce(f, None, false, None)?.remainder)
    }

    /// Returns `(r, c)` with `f = r + Σ c_i * generator_i` and `r` reduced.
    pub fn normal_form_with_cofactors(
        &self,
        f: &Polynomial,
    ) -> Result<(Polynomial, Vec<Polynomial>), GroebnerError> {
        if !self.is_tracked() {
            return Err(GroebnerError::NotTracked);
        }
        let f = self.convert(f)?;
        let red = self.reduce(f, None, true, None)?;
        let cof = self.combine(&red.quotients);
        Ok((red.remainder, cof))
    }

    fn check_bound(&self, degree: u32) -> Result<(), GroebnerError> {
        match self.degree_bound {
            Some(bound) if degree > bound => Err(GroebnerError::DegreeBoundExceeded { degree, bound }),
            _ => Ok(()),
        }
    }

    pub fn in_ideal(&self, f: &Polynomial) -> Result<bool, GroebnerError> {
        if let Some(d) = f.weighted_degree() {
            self.check_bound(d)?;
        }
        Ok(self.normal_form(f)?.is_zero())
    }

    fn spoly(&self, i: usize, j: usize) -> (Polynomial, Monomial, Monomial) {
        let l = self.ring.lcm(&self.lms[i], &self.lms[j]);
        let mi = l.div(&self.lms[i]).unwrap();
        let mj = l.div(&self.lms[j]).unwrap();
        let minus_one = self.ring.field().neg(1);
        let s = self.elements[i]
            .mul_term(1, &mi)
            .add_scaled(minus_one, Some(&mj), &self.elements[j]);
        (s, mi, mj)
    }

    /// The first pair whose S-polynomial (within the degree bound) does not
    /// reduce to zero, if any.
    pub fn criterion_violation(&self) -> Option<(usize, usize)> {
        for j in 0..self.elements.len() {
            for i in 0..j {
                let l = self.ring.lcm(&self.lms[i], &self.lms[j]);
                if self.degree_bound.is_some_and(|b| l.degree() > b) {
                    continue;
                }
                let (s, _, _) = self.spoly(i, j);
                let red = self.reduce(s, None, false, None).expect("no deadline");
                if !red.remainder.is_zero() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Number of monomials of weighted degree `d` outside the leading ideal.
    pub fn hilbert_function_quotient(&self, d: u32) -> Result<u64, GroebnerError> {
        self.check_bound(d)?;
        let weights = self.ring.weights().to_vec();
        let mut exps = [0u16; crate::mpoly::MAX_VARS];
        Ok(self.count_standard(&weights, 0, d, &mut exps))
    }

    fn count_standard(&self, weights: &[u32], var: usize, remaining: u32, exps: &mut [u16; crate::mpoly::MAX_VARS]) -> u64 {
        let partial = self.ring.monomial(&exps[..weights.len()]);
        if self.find_divisor(&partial, None).is_some() {
            return 0;
        }
        if var == weights.len() {
            return u64::from(remaining == 0);
        }
        if var == weights.len() - 1 {
            let w = weights[var];
            if remaining % w != 0 {
                return 0;
            }
            exps[var] = (remaining / w) as u16;
            let m = self.ring.monomial(&exps[..weights.len()]);
            exps[var] = 0;
            return u64::from(self.find_divisor(&m, None).is_none());
        }
        let w = weights[var];
        let mut total = 0;
        let mut e = 0u32;
        while e * w <= remaining {
            exps[var] = e as u16;
            total += self.count_standard(weights, var + 1, remaining - e * w, exps);
            e += 1;
        }
        exps[var] = 0;
        total
    }

    /// Drops redundant elements and reduces tails, keeping cofactors in step.
    fn interreduce(&mut self) -> Result<(), GroebnerError> {
        let n = self.elements.len();
        let mut keep = vec![true; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && keep[j] && self.lms[j].divides(&self.lms[i]) && (self.lms[j] != self.lms[i] || j < i) {
                    keep[i] = false;
                    break;
                }
            }
        }
        let mut old = std::mem::replace(self, GroebnerBasis {
            ring: self.ring.clone(),
            generators: self.generators.clone(),
            elements: Vec::new(),
            lms: Vec::new(),
            masks: Vec::new(),
            cofactors: self.cofactors.as_ref().map(|_| Vec::new()),
            degree_bound: self.degree_bound,
        });
        let mut cofs = old.cofactors.take();
        for (i, poly) in old.elements.into_iter().enumerate() {
            if keep[i] {
                let c = cofs.as_mut().map(|c| std::mem::take(&mut c[i]));
                self.push(poly, c);
            }
        }
        let track = self.is_tracked();
        for k in 0..self.elements.len() {
            let mut tail = self.elements[k].clone();
            let lt = tail.pop_leading().expect("nonzero");
            let red = self.reduce(tail, Some(k), track, None)?;
            let mut terms = vec![lt];
            terms.extend_from_slice(red.remainder.terms());
            let new = Polynomial::from_sorted_terms(&self.ring, terms);
            if track {
                let sub = self.combine(&red.quotients);
                let cof = self.cofactors.as_mut().unwrap();
                for (c, s) in cof[k].iter_mut().zip(sub) {
                    *c = &*c - &s;
                }
            }
            self.elements[k] = new;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Item {
    Generator(usize),
    Pair(usize, usize),
}

/// Computes a Gröbner basis of the ideal generated by `gens` under `order`.
/// With a degree bound the result is correct in all degrees up to the bound,
/// which requires homogeneous input.
pub fn buchberger(
    gens: &[Polynomial],
    order: MonomialOrder,
    opts: &BuchbergerOptions,
) -> Result<GroebnerBasis, GroebnerError> {
    let first = gens.first().ok_or(GroebnerError::Empty)?;
    let base = first.ring();
    if gens.iter().any(|g| g.ring().names() != base.names() || g.field() != base.field()) {
        return Err(GroebnerError::RingMismatch);
    }
    if opts.degree_bound.is_some() && gens.iter().any(|g| !g.is_homogeneous()) {
        return Err(GroebnerError::InhomogeneousWithTruncation);
    }
    let ring = if base.order() == order { base.clone() } else { base.with_order(order) };
    let gens: Vec<Polynomial> = gens
        .iter()
        .map(|g| g.to_ring(&ring).map_err(|_| GroebnerError::RingMismatch))
        .collect::<Result<_, _>>()?;
    let mut gb = GroebnerBasis::empty(&ring, gens.clone(), opts);
    let field = ring.field().clone();
    let within = |d: u32| opts.degree_bound.is_none_or(|b| d <= b);

    let mut queue: BinaryHeap<Reverse<(u32, u64, Item)>> = BinaryHeap::new();
    let mut seq = 0u64;
    for (i, g) in gens.iter().enumerate() {
        if let Some(d) = g.weighted_degree() {
            if within(d) {
                queue.push(Reverse((d, seq, Item::Generator(i))));
                seq += 1;
            }
        }
    }
    let mut pending: FxHashSet<(usize, usize)> = FxHashSet::default();

    while let Some(Reverse((_, _, item))) = queue.pop() {
        if let Some(d) = opts.deadline {
            if Instant::now() > d {
                return Err(GroebnerError::Timeout);
            }
        }
        let (poly, base_cof) = match item {
            Item::Generator(i) => {
                let cof = opts.track_cofactors.then(|| {
                    let mut c = vec![ring.zero(); gens.len()];
                    c[i] = ring.one();
                    c
                });
                (gens[i].clone(), cof)
            }
            Item::Pair(i, j) => {
                pending.remove(&(i, j));
                if gb.lms[i].is_coprime(&gb.lms[j]) {
                    continue;
                }
                let l = ring.lcm(&gb.lms[i], &gb.lms[j]);
                let chain = (0..gb.elements.len()).any(|k| {
                    k != i
                        && k != j
                        && gb.lms[k].divides(&l)
                        && !pending.contains(&(i.min(k), i.max(k)))
                        && !pending.contains(&(j.min(k), j.max(k)))
                });
                if chain {
                    continue;
                }
                let (s, mi, mj) = gb.spoly(i, j);
                let cof = gb.cofactors.as_ref().map(|cofs| {
                    cofs[i]
                        .iter()
                        .zip(&cofs[j])
                        .map(|(a, b)| a.mul_term(1, &mi).add_scaled(field.neg(1), Some(&mj), b))
                        .collect::<Vec<_>>()
                });
                (s, cof)
            }
        };
        let red = gb.reduce(poly, None, opts.track_cofactors, opts.deadline)?;
        if red.remainder.is_zero() {
            continue;
        }
        let lc = red.remainder.leading_term().unwrap().coeff;
        let inv = field.inv(lc).unwrap();
        let cof = base_cof.map(|base| {
            let sub = gb.combine(&red.quotients);
            base.iter().zip(sub).map(|(b, s)| (b - &s).scale_raw(inv)).collect()
        });
        let new = red.remainder.scale_raw(inv);
        let n = gb.elements.len();
        for i in 0..n {
            let l = ring.lcm(&gb.lms[i], new.leading_monomial().unwrap());
            if within(l.degree()) {
                pending.insert((i, n));
                queue.push(Reverse((l.degree(), seq, Item::Pair(i, n))));
                seq += 1;
            }
        }
        gb.push(new, cof);
    }
    gb.interreduce()?;
    Ok(gb)
}

pub fn normal_form(f: &Polynomial, gb: &GroebnerBasis) -> Result<Polynomial, GroebnerError> {
    gb.normal_form(f)
}

pub fn in_ideal(f: &Polynomial, gb: &GroebnerBasis) -> Result<bool, GroebnerError> {
    gb.in_ideal(f)
}

pub fn hilbert_function_quotient(gb: &GroebnerBasis, d: u32) -> Result<u64, GroebnerError> {
    gb.hilbert_function_quotient(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::r4;
    use crate::gens::GeneratorSet;
    use crate::GaloisField;

    fn opts(bound: Option<u32>, track: bool) -> BuchbergerOptions {
        BuchbergerOptions {
            degree_bound: bound,
            deadline: None,
            track_cofactors: track,
        }
    }

    #[test]
    fn principal_monomial_ideal() {
        let r = r4(&GaloisField::of_order(3).unwrap());
        let gb = buchberger(&[r.var(0)], MonomialOrder::GRevLex, &opts(None, false)).unwrap();
        assert_eq!(gb.elements(), &[r.var(0)]);
    }

    #[test]
    fn hand_reduction_over_gf2() {
        let r = r4(&GaloisField::of_order(2).unwrap());
        let gens = [r.parse("x1^2 + x2^2").unwrap(), r.parse("x2^2").unwrap()];
        let gb = buchberger(&gens, MonomialOrder::GRevLex, &opts(None, false)).unwrap();
        let mut got: Vec<String> = gb.elements().iter().map(|p| p.to_string()).collect();
        got.sort();
        assert_eq!(got, vec!["x1^2", "x2^2"]);
    }

    #[test]
    fn cyclic_three_is_consistent() {
        let r = r4(&GaloisField::of_order(5).unwrap());
        let gens = [
            r.parse("x1 + x2 + y1").unwrap(),
            r.parse("x1*x2 + x2*y1 + y1*x1").unwrap(),
            r.parse("x1*x2*y1 - y2^3").unwrap(),
        ];
        for order in [MonomialOrder::GRevLex, MonomialOrder::GLex, MonomialOrder::Lex] {
            let gb = buchberger(&gens, order, &opts(None, true)).unwrap();
            assert_eq!(gb.criterion_violation(), None);
            for g in &gens {
                assert!(gb.in_ideal(g).unwrap());
            }
            for (k, e) in gb.elements().iter().enumerate() {
                let cof = gb.element_cofactors(k).unwrap();
                let sum = cof
                    .iter()
                    .zip(gb.generators())
                    .fold(gb.ring().zero(), |acc, (c, g)| acc + c * g);
                assert_eq!(&sum, e);
                assert_eq!(e.leading_term().unwrap().coeff, 1);
            }
            assert!(!gb.in_ideal(&r.one().to_ring(gb.ring()).unwrap()).unwrap());
        }
    }

    #[test]
    fn truncation_rules() {
        let r = r4(&GaloisField::of_order(2).unwrap());
        let f = r.parse("x1^2 + x2").unwrap();
        assert_eq!(
            buchberger(&[f], MonomialOrder::GRevLex, &opts(Some(4), false)).unwrap_err(),
            GroebnerError::InhomogeneousWithTruncation
        );
        let gb = buchberger(&[r.var(0)], MonomialOrder::GRevLex, &opts(Some(3), false)).unwrap();
        assert!(matches!(
            gb.in_ideal(&r.var(0).pow(4)),
            Err(GroebnerError::DegreeBoundExceeded { degree: 4, bound: 3 })
        ));
        assert!(gb.hilbert_function_quotient(4).is_err());
    }

    #[test]
    fn timeout_is_reported() {
        let gs = GeneratorSet::new(&GaloisField::of_order(3).unwrap()).unwrap();
        let o = BuchbergerOptions {
            degree_bound: Some(40),
            deadline: Some(Instant::now()),
            track_cofactors: false,
        };
        assert_eq!(buchberger(&gs.ideal(), MonomialOrder::GRevLex, &o).unwrap_err(), GroebnerError::Timeout);
    }

    #[test]
    fn ideal_of_relations_q2() {
        let gs = GeneratorSet::new(&GaloisField::of_order(2).unwrap()).unwrap();
        let ideal = gs.ideal();
        let gb = buchberger(&ideal, MonomialOrder::GRevLex, &opts(None, true)).unwrap();
        assert_eq!(gb.criterion_violation(), None);
        let t1u0 = &ideal[0] * &gs.s7.var(crate::gens::U0);
        assert!(gb.normal_form(&t1u0).unwrap().is_zero());
        assert!(!gb.in_ideal(&gs.s7.one()).unwrap());
        assert_eq!(gb.hilbert_function_quotient(0).unwrap(), 1);
        assert_eq!(gb.hilbert_function_quotient(2).unwrap(), 3);
        let glex = buchberger(&ideal, MonomialOrder::GLex, &opts(None, false)).unwrap();
        for d in 0..=24 {
            assert_eq!(
                gb.hilbert_function_quotient(d).unwrap(),
                glex.hilbert_function_quotient(d).unwrap(),
                "d = {d}"
            );
        }
    }

    #[test]
    fn truncated_relations_q3() {
        let gs = GeneratorSet::new(&GaloisField::of_order(3).unwrap()).unwrap();
        let ideal = gs.ideal();
        let a = buchberger(&ideal, MonomialOrder::GRevLex, &opts(Some(16), false)).unwrap();
        let b = buchberger(&ideal, MonomialOrder::GLex, &opts(Some(16), false)).unwrap();
        assert_eq!(a.criterion_violation(), None);
        for d in 0..=16 {
            assert_eq!(a.hilbert_function_quotient(d).unwrap(), b.hilbert_function_quotient(d).unwrap());
        }
        for g in &ideal {
            assert!(a.in_ideal(g).unwrap());
        }
        assert!(!a.in_ideal(&gs.s7.one()).unwrap());
    }
}
