//! Exact verification workbench for the invariant ring of a vector and a
//! covector under `GL_2(F_q)`.
//!
//! The crate builds the seven generators of `F_q[x1,x2,y1,y2]^{GL_2(F_q)}`,
//! the presentation ring `S = F_q[C0,C1,C0s,C1s,Um1,U0,U1]` with its five
//! relations, and a set of check suites that certify the relations, the
//! invariance of the generators, the Hilbert function of the quotient and
//! product-reduction certificates by exact computation.

pub mod gf;
pub mod linalg;
pub mod mpoly;
pub mod action;
pub mod gens;
pub mod groebner;
pub mod verify;

pub use gf::{FieldElement, FieldError, GaloisField};
pub use mpoly::{Monomial, MonomialOrder, PolyError, Polynomial, Ring, Term};
pub use action::{ActionError, GroupElement};
pub use gens::{BasisElement, BasisElementSpec, GenError, GeneratorSet, Relation};
pub use groebner::{buchberger, BuchbergerOptions, GroebnerBasis, GroebnerError};
pub use verify::{ReductionCertificate, Status, VerificationReport, VerifyError};
