//! Exact polynomial algebra and algebraic-dependence certificates.

use std::cmp::Ordering;

use thiserror::Error;

mod exact;
mod field;
mod linalg;
mod mpoly;
mod parse;
mod relation;

pub use exact::{
    apply_polynomial_exact, dependence_upto, dependence_upto_exact, parse_exact_expsum, DependenceOptions, ExactExpSum,
};
pub use field::{parse_gauss, parse_rational, recover_rational, Field, GaussInt, GaussRat, IntDomain};
pub use linalg::{first_kernel_vector, IncrementalKernel};
pub use mpoly::{Exponent, MPoly};
pub use parse::{parse_poly, ParseError};
pub use relation::{choose_q, expand_compose, find_relation, Relation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgDepError {
    #[error("expected {expected} polynomials, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("substituted polynomials must share one variable count")]
    MixedArity,
    #[error("need more polynomials than variables (N = {n}, k = {k})")]
    PreconditionViolated { n: usize, k: usize },
    #[error("input polynomial {0} is zero")]
    ZeroPolynomial(usize),
    #[error("exponent {0} is not an exact rational")]
    InexactExponents(String),
    #[error("coefficient {0} is not an exact rational")]
    InexactCoefficients(String),
    #[error("polynomial has a nonzero constant term")]
    NonUnitalConstantTerm,
    #[error("degree bound must be at least 1")]
    ZeroDegreeBound,
    #[error("malformed polynomial JSON: {0}")]
    Json(String),
}

fn total(e: &[u32]) -> u32 {
    e.iter().sum()
}

/// Column order: total degree ascending, then lexicographically descending
/// (`t1²` before `t1t2` before `t2²`).
pub fn graded_cmp(a: &[u32], b: &[u32]) -> Ordering {
    total(a).cmp(&total(b)).then_with(|| b.cmp(a))
}

/// Display order: total degree descending, then lexicographically descending.
pub fn grlex_desc(a: &[u32], b: &[u32]) -> Ordering {
    total(b).cmp(&total(a)).then_with(|| b.cmp(a))
}

/// All exponents in `nvars` variables of total degree `deg` with every entry
/// at most `cap`, lexicographically descending.
pub fn exponents_of_degree(nvars: usize, deg: u32, cap: u32) -> Vec<Exponent> {
    fn rec(prefix: &mut Exponent, left: usize, deg: u32, cap: u32, out: &mut Vec<Exponent>) {
        if left == 1 {
            if deg <= cap {
                prefix.push(deg);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        // remaining variables can absorb at most (left-1)*cap
        let rest_cap = (left as u64 - 1) * cap as u64;
        for first in (0..=deg.min(cap)).rev() {
            if ((deg - first) as u64) > rest_cap {
                break;
            }
            prefix.push(first);
            rec(prefix, left - 1, deg - first, cap, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(&mut Vec::with_capacity(nvars), nvars, deg, cap, &mut out);
    out
}
