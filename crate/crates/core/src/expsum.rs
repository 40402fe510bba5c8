//! Finite exponential sums `Σ aⱼ e^{λⱼ z}` and their closed-form calculus.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algdep::{Field, MPoly};
use crate::complex::{cmp_lex, pair, C64};
use crate::symbols::Symbol;

/// Exponents closer than this (complex modulus) are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Coefficients of at most this modulus are dropped.
pub const PRUNE_TOL: f64 = 1e-300;

const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpSumError {
    #[error("expected {expected} exponential sums, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial has a nonzero constant term")]
    ConstantTerm,
}

/// One term `coeff · e^{lambda z}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "pair")]
    pub lambda: C64,
    #[serde(with = "pair")]
    pub coeff: C64,
}

#[derive(Deserialize)]
struct RawExpSum {
    terms: Vec<Term>,
}

impl From<RawExpSum> for ExpSum {
    fn from(raw: RawExpSum) -> Self {
        ExpSum::from_terms(raw.terms)
    }
}

/// Normalized exponential sum: terms sorted by `(Re λ, Im λ)`, exponents
/// separated by more than [`MERGE_TOL`], no negligible coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawExpSum")]
pub struct ExpSum {
    terms: Vec<Term>,
}

impl ExpSum {
    pub fn zero() -> Self {
        ExpSum::default()
    }

    /// `c · e^{0z}`
    pub fn constant(c: C64) -> Self {
        Self::exp(c, C64::new(0.0, 0.0))
    }

    /// `coeff · e^{lambda z}`
    pub fn exp(coeff: C64, lambda: C64) -> Self {
        Self::from_terms(vec![Term { lambda, coeff }])
    }

    /// From `(coeff, lambda)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (C64, C64)>) -> Self {
        Self::from_terms(pairs.into_iter().map(|(coeff, lambda)| Term { lambda, coeff }).collect())
    }

    pub fn from_terms(mut terms: Vec<Term>) -> Self {
        terms.sort_by(|a, b| cmp_lex(&a.lambda, &b.lambda));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            // candidates within MERGE_TOL have Re λ within MERGE_TOL, hence sit at the tail
            let hit = out
                .iter_mut()
                .rev()
                .take_while(|s| s.lambda.re >= t.lambda.re - MERGE_TOL)
                .find(|s| (s.lambda - t.lambda).norm() <= MERGE_TOL);
            match hit {
                Some(s) => s.coeff += t.coeff,
                None => out.push(t),
            }
        }
        out.retain(|t| t.coeff.norm() > PRUNE_TOL);
        ExpSum { terms: out }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The zero function.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exponents(&self) -> impl Iterator<Item = C64> + '_ {
        self.terms.iter().map(|t| t.lambda)
    }

    /// Coefficient of the term with exponent within [`MERGE_TOL`] of `lambda`.
    pub fn coeff_at(&self, lambda: C64) -> C64 {
        self.terms
            .iter()
            .find(|t| (t.lambda - lambda).norm() <= MERGE_TOL)
            .map_or(C64::new(0.0, 0.0), |t| t.coeff)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| Term { lambda: t.lambda, coeff: t.coeff * s }).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        linear_combine(&[(C64::new(1.0, 0.0), self), (C64::new(1.0, 0.0), other)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        linear_combine(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), other)])
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term { lambda: a.lambda + b.lambda, coeff: a.coeff * b.coeff });
            }
        }
        Self::from_terms(terms)
    }

    /// Binary exponentiation of [`mul`](Self::mul).
    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::constant(C64::new(1.0, 0.0));
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.terms.iter().map(|t| t.coeff * (t.lambda * z).exp()).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("finite floats serialize")
    }
}

/// `Σ sᵢ fᵢ` with merging and pruning.
pub fn linear_combine(pairs: &[(C64, &ExpSum)]) -> ExpSum {
    let terms = pairs
        .iter()
        .flat_map(|(s, f)| f.terms.iter().map(move |t| Term { lambda: t.lambda, coeff: t.coeff * s }))
        .collect();
    ExpSum::from_terms(terms)
}

pub fn mul(f: &ExpSum, g: &ExpSum) -> ExpSum {
    f.mul(g)
}

/// `Π fᵢ^{αᵢ}`; the empty product is `1·e^{0z}`.
pub fn monomial_power(f: &[ExpSum], alpha: &[u32]) -> ExpSum {
    assert_eq!(f.len(), alpha.len(), "one exponent per exponential sum");
    f.iter()
        .zip(alpha)
        .filter(|(_, &a)| a > 0)
        .fold(ExpSum::constant(C64::new(1.0, 0.0)), |acc, (g, &a)| acc.mul(&g.pow(a)))
}

/// `Φ(D)ⁿ f`: each term `a e^{λz}` becomes `a Φ(λ)ⁿ e^{λz}`.
pub fn apply_operator(phi: &Symbol, f: &ExpSum, n: u32) -> ExpSum {
    if n == 0 {
        return f.clone();
    }
    let terms = f
        .terms
        .iter()
        .map(|t| Term { lambda: t.lambda, coeff: t.coeff * phi.eval(t.lambda).powu(n) })
        .filter(|t| t.coeff.norm() > PRUNE_TOL)
        .collect();
    // exponents are untouched, so the order and separation invariants still hold
    ExpSum { terms }
}

/// `P(f₁,…,f_N) = Σ c_α f^α`. With `non_unital` set, a constant term in `P`
/// is rejected.
pub fn apply_polynomial<K: Field>(p: &MPoly<K>, f: &[ExpSum], non_unital: bool) -> Result<ExpSum, ExpSumError> {
    if p.nvars() != f.len() {
        return Err(ExpSumError::DimensionMismatch { expected: p.nvars(), got: f.len() });
    }
    if non_unital && p.has_constant_term() {
        return Err(ExpSumError::ConstantTerm);
    }
    let parts: Vec<(C64, ExpSum)> = p.terms().map(|(alpha, c)| (c.to_c64(), monomial_power(f, alpha))).collect();
    let refs: Vec<(C64, &ExpSum)> = parts.iter().map(|(c, g)| (*c, g)).collect();
    Ok(linear_combine(&refs))
}

pub fn eval_point(f: &ExpSum, z: C64) -> C64 {
    f.eval(z)
}

/// Polar sample grid `ρ = R j/n_r` (`j = 0..=n_r`), `θ = 2π m/n_θ` (`m < n_θ`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { n_r: 24, n_theta: 96 }
    }
}

impl Grid {
    pub fn doubled(self) -> Self {
        Grid { n_r: 2 * self.n_r, n_theta: 2 * self.n_theta }
    }

    pub fn points(&self, radius: f64) -> Vec<C64> {
        let mut pts = vec![C64::new(0.0, 0.0)];
        for j in 1..=self.n_r {
            let rho = radius * j as f64 / self.n_r as f64;
            for m in 0..self.n_theta {
                pts.push(C64::from_polar(rho, 2.0 * PI * m as f64 / self.n_theta as f64));
            }
        }
        pts
    }
}

/// Largest `|f − g|` over the grid points on `|z| ≤ radius`; a lower bound for
/// the sup norm on the disc.
pub fn sup_distance(f: &ExpSum, g: &ExpSum, radius: f64, grid: Grid) -> f64 {
    let diff = f.sub(g);
    sup_norm(&diff, radius, grid)
}

pub fn sup_norm(f: &ExpSum, radius: f64, grid: Grid) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    let pts = grid.points(radius);
    let at = |z: &C64| f.eval(*z).norm();
    if pts.len() * f.len() >= PAR_THRESHOLD {
        pts.par_iter().map(at).reduce(|| 0.0, f64::max)
    } else {
        pts.iter().map(at).fold(0.0, f64::max)
    }
}

/// Taylor coefficients `c_m = Σⱼ aⱼ λⱼ^m / m!` for `m = 0..=k`.
pub fn taylor_truncate(f: &ExpSum, k: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); k + 1];
    for t in &f.terms {
        let mut c = t.coeff;
        for (m, slot) in out.iter_mut().enumerate() {
            if m > 0 {
                c = c * t.lambda / m as f64;
            }
            *slot += c;
        }
    }
    out
}
