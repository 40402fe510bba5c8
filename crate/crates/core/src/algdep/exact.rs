use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use super::field::{parse_gauss, recover_rational, Field, GaussRat};
use super::mpoly::{Exponent, MPoly};
use super::relation::DependencySearch;
use super::{exponents_of_degree, AlgDepError};
use crate::complex::C64;
use crate::expsum::ExpSum;

/// Exponential sum with exact Gaussian-rational exponents and coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactExpSum {
    terms: BTreeMap<GaussRat, GaussRat>,
}

impl ExactExpSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::term(GaussRat::one(), GaussRat::zero())
    }

    /// `coeff · e^{lambda z}`
    pub fn term(coeff: GaussRat, lambda: GaussRat) -> Self {
        let mut s = Self::zero();
        s.add_term(lambda, coeff);
        s
    }

    pub fn add_term(&mut self, lambda: GaussRat, coeff: GaussRat) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(lambda).or_insert_with(GaussRat::zero);
        *slot = slot.clone() + coeff;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    /// `(exponent, coefficient)` pairs, sorted by exponent.
    pub fn terms(&self) -> impl Iterator<Item = (&GaussRat, &GaussRat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (l, c) in &other.terms {
            out.add_term(l.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &GaussRat) -> Self {
        let mut out = Self::zero();
        for (l, c) in &self.terms {
            out.add_term(l.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (la, ca) in &self.terms {
            for (lb, cb) in &other.terms {
                out.add_term(la.clone() + lb.clone(), ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Recovers exact values from a floating exp-sum. Every real and imaginary
    /// part must be a rational with denominator at most `max_den` to within
    /// `tol`.
    pub fn from_expsum(f: &ExpSum, max_den: u64, tol: f64) -> Result<Self, AlgDepError> {
        let exact = |z: C64| -> Option<GaussRat> {
            Some(GaussRat::new(recover_rational(z.re, max_den, tol)?, recover_rational(z.im, max_den, tol)?))
        };
        let mut out = Self::zero();
        for t in f.terms() {
            let l = exact(t.lambda).ok_or_else(|| AlgDepError::InexactExponents(format!("{}", t.lambda)))?;
            let c = exact(t.coeff).ok_or_else(|| AlgDepError::InexactCoefficients(format!("{}", t.coeff)))?;
            out.add_term(l, c);
        }
        Ok(out)
    }

    pub fn to_expsum(&self) -> ExpSum {
        ExpSum::from_pairs(self.terms.iter().map(|(l, c)| (c.to_c64(), l.to_c64())))
    }
}

impl fmt::Display for ExactExpSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(l, c)| format!("{c}@{l}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Parses `c@λ` terms separated by commas, e.g. `1@1,-1@-1` for
/// `e^z − e^{−z}`. Both parts are exact Gaussian rationals (`3/2`, `1-2i`).
pub fn parse_exact_expsum(s: &str) -> Result<ExactExpSum, String> {
    let mut out = ExactExpSum::zero();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (c, l) = part.split_once('@').ok_or_else(|| format!("term `{part}` is not of the form c@lambda"))?;
        let c = parse_gauss(c).ok_or_else(|| format!("bad coefficient `{c}`"))?;
        let l = parse_gauss(l).ok_or_else(|| format!("bad exponent `{l}`"))?;
        out.add_term(l, c);
    }
    Ok(out)
}

/// Exact `R(f₁,…,f_N)`.
pub fn apply_polynomial_exact(r: &MPoly<GaussRat>, f: &[ExactExpSum]) -> Result<ExactExpSum, AlgDepError> {
    if r.nvars() != f.len() {
        return Err(AlgDepError::DimensionMismatch { expected: r.nvars(), got: f.len() });
    }
    let mut memo = Products::new(f);
    let mut out = ExactExpSum::zero();
    for (alpha, c) in r.terms() {
        out = out.add(&memo.get(alpha).scale(c));
    }
    Ok(out)
}

struct Products<'a> {
    f: &'a [ExactExpSum],
    memo: HashMap<Exponent, ExactExpSum>,
}

impl<'a> Products<'a> {
    fn new(f: &'a [ExactExpSum]) -> Self {
        let mut memo = HashMap::new();
        memo.insert(vec![0; f.len()], ExactExpSum::one());
        Products { f, memo }
    }

    fn get(&mut self, alpha: &Exponent) -> ExactExpSum {
        if let Some(p) = self.memo.get(alpha) {
            return p.clone();
        }
        let j = alpha.iter().position(|&a| a > 0).expect("zero exponent is seeded");
        let mut prev = alpha.clone();
        prev[j] -= 1;
        let out = self.get(&prev).mul(&self.f[j]);
        self.memo.insert(alpha.clone(), out.clone());
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DependenceOptions {
    /// admit a constant term in `R`
    pub unital: bool,
    /// denominator bound when recovering exact values from floats
    pub max_den: u64,
    pub tol: f64,
}

impl Default for DependenceOptions {
    fn default() -> Self {
        DependenceOptions { unital: false, max_den: 1 << 20, tol: 1e-12 }
    }
}

/// Searches for `R` with `1 ≤ deg R ≤ m` (and `R(0) = 0` unless unital)
/// annihilating `f`. `None` certifies independence up to degree `m`.
pub fn dependence_upto(f: &[ExpSum], m: u32, opts: DependenceOptions) -> Result<Option<MPoly<GaussRat>>, AlgDepError> {
    let exact = f
        .iter()
        .map(|g| ExactExpSum::from_expsum(g, opts.max_den, opts.tol))
        .collect::<Result<Vec<_>, _>>()?;
    dependence_upto_exact(&exact, m, opts.unital)
}

/// Distinct exponentials are linearly independent, so grouping the expansion
/// of each candidate monomial by exact exponent gives the linear system for
/// the unknown coefficients of `R`.
pub fn dependence_upto_exact(
    f: &[ExactExpSum],
    m: u32,
    unital: bool,
) -> Result<Option<MPoly<GaussRat>>, AlgDepError> {
    if m == 0 {
        return Err(AlgDepError::ZeroDegreeBound);
    }
    let n = f.len();
    let mut products = Products::new(f);
    let mut search = DependencySearch::<GaussRat, GaussRat>::new();
    let start = if unital { 0 } else { 1 };
    for deg in start..=m {
        for alpha in exponents_of_degree(n, deg, m) {
            let image = products.get(&alpha);
            let entries: Vec<(GaussRat, GaussRat)> = image.terms().map(|(l, c)| (l.clone(), c.clone())).collect();
            if let Some(rel) = search.push(alpha, entries) {
                return Ok(Some(MPoly::from_terms(n, rel)));
            }
        }
    }
    Ok(None)
}
