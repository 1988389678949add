use std::time::Instant;

use crate::action::{gl2_generators, invariant_dimension, R4_NAMES};
use crate::gens::{enumerate_basis, GeneratorSet, Relation, S7_NAMES};
use crate::groebner::{buchberger, BuchbergerOptions, GroebnerBasis, GroebnerError};
use crate::mpoly::{MonomialOrder, Polynomial, Ring};

use super::{basis_span_gap, count_check, zero_check, Runner, Status, VerificationReport};

/// The three columns compared degree by degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertColumns {
    /// Brute-force invariant dimensions in R4.
    pub brute: Vec<u64>,
    /// Coefficients of `Σ T^{deg l} / ((1-T^{q²-1})² (1-T^{q²-q})²)`.
    pub series: Vec<u64>,
    /// Standard monomial counts of `S7 / I`.
    pub standard: Vec<u64>,
}

/// Power-series coefficients up to `max_degree` of the Hilbert series
/// predicted by the module basis.
pub fn series_coefficients(q: u32, max_degree: u32) -> Vec<u64> {
    let n = max_degree as usize + 1;
    let mut coeffs = vec![0u64; n];
    for spec in enumerate_basis(q) {
        let d = spec.degree(q) as usize;
        if d < n {
            coeffs[d] += 1;
        }
    }
    for w in [q * q - 1, q * q - 1, q * q - q, q * q - q] {
        let w = w as usize;
        for k in w..n {
            coeffs[k] += coeffs[k - w];
        }
    }
    coeffs
}

fn truncated_gb(gens: &[Polynomial], bound: u32, deadline: Option<Instant>) -> Result<GroebnerBasis, GroebnerError> {
    truncated_gb_in(gens, MonomialOrder::GRevLex, bound, deadline)
}

fn truncated_gb_in(
    gens: &[Polynomial],
    order: MonomialOrder,
    bound: u32,
    deadline: Option<Instant>,
) -> Result<GroebnerBasis, GroebnerError> {
    buchberger(
        gens,
        order,
        &BuchbergerOptions {
            degree_bound: Some(bound),
            deadline,
            track_cofactors: false,
        },
    )
}

fn standard_counts(gb: &GroebnerBasis, max_degree: u32) -> Result<Vec<u64>, GroebnerError> {
    (0..=max_degree).map(|d| gb.hilbert_function_quotient(d)).collect()
}

pub fn hilbert_columns(
    gs: &GeneratorSet,
    max_degree: u32,
    deadline: Option<Instant>,
) -> Result<HilbertColumns, GroebnerError> {
    let gb = truncated_gb(&gs.ideal(), max_degree, deadline)?;
    let standard = standard_counts(&gb, max_degree)?;
    let series = series_coefficients(gs.q(), max_degree);
    let group = gl2_generators(&gs.field);
    let mut brute = Vec::new();
    for d in 0..=max_degree {
        if deadline.is_some_and(|t| Instant::now() > t) {
            return Err(GroebnerError::Timeout);
        }
        brute.push(invariant_dimension(&gs.field, &group, d) as u64);
    }
    Ok(HilbertColumns { brute, series, standard })
}

fn timeout_report(mut r: Runner, what: &str) -> VerificationReport {
    let elapsed = 0;
    r.push(what.to_string(), Status::Timeout, "time budget exhausted".into(), elapsed);
    r.finish()
}

/// Three-way agreement of Hilbert functions in every degree up to `max_degree`.
pub fn check_hilbert(gs: &GeneratorSet, max_degree: u32, deadline: Option<Instant>) -> VerificationReport {
    let q = gs.q();
    let mut r = Runner::new("hilbert", q, deadline);
    r.report.param("max_degree", max_degree);
    r.run("basis census", || {
        count_check(enumerate_basis(q).len(), ((q * q - 1) * (q * q - q)) as usize)
    });
    let cols = match hilbert_columns(gs, max_degree, deadline) {
        Ok(c) => c,
        Err(GroebnerError::Timeout) => return timeout_report(r, "columns"),
        Err(e) => {
            r.push("columns".into(), Status::Fail, e.to_string(), 0);
            return r.finish();
        }
    };
    let gb = truncated_gb(&gs.ideal(), max_degree, deadline);
    for d in 0..=max_degree as usize {
        let (a, b, c) = (cols.brute[d], cols.series[d], cols.standard[d]);
        r.run(format!("degree {d}"), || {
            let counts = format!("invariants {a}, series {b}, standard monomials {c}");
            if a == b && b == c {
                return (Status::Pass, counts);
            }
            let witness = match &gb {
                Ok(gb) if b < c => match basis_span_gap(gs, gb, d as u32) {
                    Ok(Some(m)) => format!("; {m} is outside the N-span of the basis modulo I"),
                    _ => String::new(),
                },
                _ => String::new(),
            };
            (Status::Fail, counts + &witness)
        });
    }
    r.finish()
}

#[derive(Debug, Clone, Default)]
pub struct KernelOptions {
    pub deadline: Option<Instant>,
    /// Also run the elimination experiment (q = 2 only).
    pub elimination: bool,
}

/// Degreewise certification of `ker(pi) = I` up to `max_degree`.
pub fn check_kernel(gs: &GeneratorSet, max_degree: u32, opts: &KernelOptions) -> VerificationReport {
    let q = gs.q();
    let mut r = Runner::new("kernel", q, opts.deadline);
    r.report.param("max_degree", max_degree);
    r.report.param("elimination", opts.elimination);
    for rel in Relation::ALL {
        r.run(format!("pi({}) = 0", rel.name()), || match gs.pi(&gs.relation(rel)) {
            Ok(v) => zero_check(&v),
            Err(e) => (Status::Fail, e.to_string()),
        });
    }
    let cols = match hilbert_columns(gs, max_degree, opts.deadline) {
        Ok(c) => c,
        Err(GroebnerError::Timeout) => return timeout_report(r, "dimensions"),
        Err(e) => {
            r.push("dimensions".into(), Status::Fail, e.to_string(), 0);
            return r.finish();
        }
    };
    for d in 0..=max_degree as usize {
        let (a, c) = (cols.brute[d], cols.standard[d]);
        r.run(format!("dim(S/I)_{d} = dim(R)_{d}"), || {
            let status = if a == c { Status::Pass } else { Status::Fail };
            (status, format!("S/I {c}, R {a}"))
        });
    }
    let certified = r.report.items.iter().all(|i| i.status == Status::Pass);
    r.run(format!("ker(pi)_d = I_d for d <= {max_degree}"), || {
        if certified {
            (
                Status::Pass,
                "I lies in ker(pi) and S/I -> R is a degreewise bijection up to the bound".into(),
            )
        } else {
            (Status::Fail, "a prerequisite check failed".into())
        }
    });

    let deadline = opts.deadline;
    r.run("control(drop T10)", || {
        let reduced: Vec<Polynomial> = Relation::ALL
            .iter()
            .filter(|rel| **rel != Relation::T10)
            .map(|rel| gs.relation(*rel))
            .collect();
        let counts = match truncated_gb(&reduced, max_degree, deadline).and_then(|gb| standard_counts(&gb, max_degree)) {
            Ok(c) => c,
            Err(GroebnerError::Timeout) => return (Status::Timeout, "time budget exhausted".into()),
            Err(e) => return (Status::Fail, e.to_string()),
        };
        match (0..counts.len()).find(|&d| counts[d] != cols.brute[d]) {
            Some(d) => (
                Status::Pass,
                format!("mismatch detected at degree {d}: S/I' {} vs R {}", counts[d], cols.brute[d]),
            ),
            None => (Status::Fail, format!("no mismatch up to degree {max_degree}")),
        }
    });

    if !opts.elimination {
        r.run("elimination", || (Status::Skipped, "not requested".into()));
    } else if q != 2 {
        r.run("elimination", || (Status::Skipped, "only attempted for q = 2".into()));
    } else {
        r.run("elimination", || match elimination_experiment(gs, max_degree, deadline) {
            Ok((true, n)) => (Status::Pass, format!("eliminated basis matches GB(I) ({n} elements)")),
            Ok((false, n)) => (Status::Fail, format!("eliminated basis ({n} elements) differs from GB(I)")),
            Err(GroebnerError::Timeout) => (Status::Timeout, "time budget exhausted".into()),
            Err(e) => (Status::Fail, e.to_string()),
        });
    }
    r.finish()
}

/// Computes the kernel of `pi` by elimination in the 11-variable ring
/// `R4 ⊗ S7` (truncated at `max_degree`) and compares it with `GB(I)`.
/// Returns whether the reduced bases agree and the basis size.
pub fn elimination_experiment(
    gs: &GeneratorSet,
    max_degree: u32,
    deadline: Option<Instant>,
) -> Result<(bool, usize), GroebnerError> {
    let q = gs.q();
    let names: Vec<&str> = R4_NAMES.iter().chain(S7_NAMES.iter()).copied().collect();
    let mut weights = vec![1u32; 4];
    weights.extend(crate::gens::s7_weights(q));
    let big = Ring::new(gs.field.clone(), &names, Some(&weights), MonomialOrder::Elimination { first: 4 })
        .map_err(|_| GroebnerError::RingMismatch)?;
    let lift_r4 = |f: &Polynomial| f.map_monomials(&big, |e| *e);
    let gens: Vec<Polynomial> = gs
        .images()
        .iter()
        .enumerate()
        .map(|(i, img)| big.var(4 + i) - lift_r4(img))
        .collect();
    let gb = truncated_gb_in(&gens, MonomialOrder::Elimination { first: 4 }, max_degree, deadline)?;
    let s7 = &gs.s7;
    let eliminated: Vec<Polynomial> = gb
        .elements()
        .iter()
        .filter(|p| p.support_vars().iter().all(|&v| v >= 4))
        .map(|p| {
            p.map_monomials(s7, |e| {
                let mut out = [0u16; crate::mpoly::MAX_VARS];
                out[..7].copy_from_slice(&e[4..11]);
                out
            })
        })
        .collect();
    if eliminated.is_empty() {
        return Ok((false, 0));
    }
    let from_kernel = truncated_gb(&eliminated, max_degree, deadline)?;
    let from_ideal = truncated_gb(&gs.ideal(), max_degree, deadline)?;
    let mut a: Vec<String> = from_kernel.elements().iter().map(|p| p.to_string()).collect();
    let mut b: Vec<String> = from_ideal.elements().iter().map(|p| p.to_string()).collect();
    a.sort();
    b.sort();
    Ok((a == b, a.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GaloisField;

    fn gs(q: u32) -> GeneratorSet {
        GeneratorSet::new(&GaloisField::of_order(q).unwrap()).unwrap()
    }

    /// Direct expansion of the rational function by repeated long division.
    fn series_oracle(q: u32, n: usize) -> Vec<i64> {
        let mut num = vec![0i64; n];
        for spec in enumerate_basis(q) {
            let d = spec.degree(q) as usize;
            if d < n {
                num[d] += 1;
            }
        }
        // multiply by 1 / (1 - T^w) as the geometric series 1 + T^w + T^{2w} + ...
        for w in [q * q - 1, q * q - 1, q * q - q, q * q - q] {
            let w = w as usize;
            let mut out = vec![0i64; n];
            for (i, c) in num.iter().enumerate() {
                let mut k = i;
                while k < n {
                    out[k] += c;
                    k += w;
                }
            }
            num = out;
        }
        num
    }

    #[test]
    fn series_matches_oracle() {
        for q in [2, 3, 4] {
            let got: Vec<i64> = series_coefficients(q, 40).into_iter().map(|c| c as i64).collect();
            assert_eq!(got, series_oracle(q, 41));
        }
        // 1; -; C1, C1s, U0; C0, C0s, Um1, U1; ...
        assert_eq!(&series_coefficients(2, 4)[..], &[1, 0, 3, 4, 6]);
    }

    #[test]
    fn hilbert_q2_small() {
        let rep = check_hilbert(&gs(2), 12, None);
        assert_eq!(rep.overall(), Status::Pass, "{}", rep.to_text());
    }

    #[test]
    fn kernel_q2_with_control() {
        let rep = check_kernel(&gs(2), 12, &KernelOptions::default());
        assert_eq!(rep.overall(), Status::Pass, "{}", rep.to_text());
        assert_eq!(rep.item("control(drop T10)").unwrap().status, Status::Pass);
        assert_eq!(rep.item("elimination").unwrap().status, Status::Skipped);
    }

    #[test]
    fn elimination_small_bound() {
        let (same, n) = elimination_experiment(&gs(2), 10, None).unwrap();
        assert!(same);
        assert!(n >= 5);
    }
}
