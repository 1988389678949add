//! Sparse Gaussian elimination over GF(q).
//!
//! Vectors are sorted lists of `(key, coefficient)` pairs. The echelon keeps
//! one row per pivot key, normalised so the pivot (its smallest key) has
//! coefficient 1, and optionally records each row as a combination of the
//! inserted vectors so that a vector in the span can be expressed in them.

use rustc_hash::FxHashMap;

use crate::gf::GaloisField;

pub type SparseVec = Vec<(u32, u8)>;

#[derive(Clone)]
struct Row {
    vec: SparseVec,
    /// Combination of input ids producing `vec`.
    combo: SparseVec,
}

#[derive(Clone)]
pub struct Echelon {
    field: GaloisField,
    pivots: FxHashMap<u32, usize>,
    rows: Vec<Row>,
    track: bool,
}

impl Echelon {
    pub fn new(field: &GaloisField, track: bool) -> Self {
        Echelon {
            field: field.clone(),
            pivots: FxHashMap::default(),
            rows: Vec::new(),
            track,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Inserts `vec` tagged with `id`; returns whether it enlarged the span.
    pub fn insert(&mut self, vec: SparseVec, id: u32) -> bool {
        let combo = if self.track { vec![(id, 1)] } else { Vec::new() };
        let (vec, combo) = self.top_reduce(vec, combo);
        let Some(&(key, lead)) = vec.first() else {
            return false;
        };
        let inv = self.field.inv(lead).expect("nonzero lead");
        let f = &self.field;
        let vec = vec.into_iter().map(|(k, c)| (k, f.mul(c, inv))).collect();
        let combo = combo.into_iter().map(|(k, c)| (k, f.mul(c, inv))).collect();
        self.pivots.insert(key, self.rows.len());
        self.rows.push(Row { vec, combo });
        true
    }

    /// Writes `vec` as a combination of the inserted vectors, or `None` when
    /// it lies outside their span. Requires tracking.
    pub fn express(&self, vec: SparseVec) -> Option<SparseVec> {
        assert!(self.track, "express needs an echelon built with tracking");
        let (rest, combo) = self.top_reduce(vec, Vec::new());
        if !rest.is_empty() {
            return None;
        }
        // top_reduce accumulated -combination; negate back.
        let f = &self.field;
        Some(combo.into_iter().map(|(k, c)| (k, f.neg(c))).collect())
    }

    /// Whether `vec` lies in the row space.
    pub fn contains(&self, vec: SparseVec) -> bool {
        self.top_reduce(vec, Vec::new()).0.is_empty()
    }

    /// Subtracts pivot rows until the leading key is not a pivot. The second
    /// component accumulates the same operations applied to `combo`.
    fn top_reduce(&self, mut vec: SparseVec, mut combo: SparseVec) -> (SparseVec, SparseVec) {
        let f = &self.field;
        while let Some(&(key, c)) = vec.first() {
            let Some(&r) = self.pivots.get(&key) else {
                break;
            };
            let row = &self.rows[r];
            let factor = f.neg(c);
            vec = axpy(f, &vec, factor, &row.vec);
            if self.track {
                combo = axpy(f, &combo, factor, &row.combo);
            }
        }
        (vec, combo)
    }
}

/// `a + c * b` for sorted sparse vectors.
pub fn axpy(f: &GaloisField, a: &[(u32, u8)], c: u8, b: &[(u32, u8)]) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ka, va) = a[i];
        let (kb, vb) = b[j];
        if ka < kb {
            out.push((ka, va));
            i += 1;
        } else if kb < ka {
            let v = f.mul(c, vb);
            if v != 0 {
                out.push((kb, v));
            }
            j += 1;
        } else {
            let v = f.add(va, f.mul(c, vb));
            if v != 0 {
                out.push((ka, v));
            }
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    for &(kb, vb) in &b[j..] {
        let v = f.mul(c, vb);
        if v != 0 {
            out.push((kb, v));
        }
    }
    out
}

/// Rank of a dense matrix given as rows of raw field elements.
pub fn dense_rank(field: &GaloisField, rows: &[Vec<u8>]) -> usize {
    let mut e = Echelon::new(field, false);
    for (i, row) in rows.iter().enumerate() {
        let v: SparseVec = row
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(k, c)| (k as u32, *c))
            .collect();
        e.insert(v, i as u32);
    }
    e.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_over_gf2_and_gf3() {
        let f2 = GaloisField::of_order(2).unwrap();
        let rows = vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]];
        assert_eq!(dense_rank(&f2, &rows), 2);
        let f3 = GaloisField::of_order(3).unwrap();
        assert_eq!(dense_rank(&f3, &rows), 3);
    }

    #[test]
    fn express_recovers_combination() {
        let f = GaloisField::of_order(5).unwrap();
        let mut e = Echelon::new(&f, true);
        let a: SparseVec = vec![(0, 1), (2, 3)];
        let b: SparseVec = vec![(1, 2), (2, 1)];
        assert!(e.insert(a.clone(), 0));
        assert!(e.insert(b.clone(), 1));
        // 2a + 3b
        let target = axpy(&f, &axpy(&f, &[], 2, &a), 3, &b);
        let combo = e.express(target).unwrap();
        assert_eq!(combo, vec![(0, 2), (1, 3)]);
        assert!(e.express(vec![(3, 1)]).is_none());
        assert!(!e.insert(axpy(&f, &a, 1, &b), 2));
    }
}
