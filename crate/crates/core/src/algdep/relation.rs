use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::One;

use super::field::Field;
use super::linalg::IncrementalKernel;
use super::mpoly::{Exponent, MPoly};
use super::{exponents_of_degree, AlgDepError};

/// A relation `R` with `R(P₁,…,P_N) = 0` and the search bounds that produced it.
#[derive(Clone, Debug)]
pub struct Relation<K: Field> {
    pub poly: MPoly<K>,
    /// maximum degree of the input polynomials
    pub d: u32,
    /// per-variable exponent cap
    pub q: u64,
    /// candidate monomials examined before the dependency appeared
    pub columns: usize,
}

/// Smallest positive `q` with `q^N > (N·d·q + 1)^k`.
pub fn choose_q(n: usize, k: usize, d: u32) -> u64 {
    let holds = |q: u64| {
        let lhs = BigUint::from(q).pow(n as u32);
        let rhs = (BigUint::from(n as u64) * BigUint::from(d) * BigUint::from(q) + BigUint::one()).pow(k as u32);
        lhs > rhs
    };
    let mut q = 1u64;
    while !holds(q) {
        q += 1;
    }
    q
}

pub fn expand_compose<K: Field>(r: &MPoly<K>, polys: &[MPoly<K>]) -> Result<MPoly<K>, AlgDepError> {
    r.compose(polys)
}

/// Products `Π Pᵢ^{αᵢ}` memoized along the graded enumeration.
struct ProductMemo<'a, K: Field> {
    polys: &'a [MPoly<K>],
    memo: HashMap<Exponent, MPoly<K>>,
}

impl<'a, K: Field> ProductMemo<'a, K> {
    fn new(polys: &'a [MPoly<K>], k: usize) -> Self {
        let mut memo = HashMap::new();
        memo.insert(vec![0; polys.len()], MPoly::constant(k, K::one()));
        ProductMemo { polys, memo }
    }

    fn get(&mut self, alpha: &Exponent) -> MPoly<K> {
        if let Some(p) = self.memo.get(alpha) {
            return p.clone();
        }
        let j = alpha.iter().position(|&a| a > 0).expect("zero exponent is seeded");
        let mut prev = alpha.clone();
        prev[j] -= 1;
        let out = self.get(&prev).mul(&self.polys[j]);
        self.memo.insert(alpha.clone(), out.clone());
        out
    }
}

/// Feeds candidate exponents to a kernel until the first linear dependency
/// among their images; image rows (keyed by `R`) are indexed on first sight.
pub(crate) struct DependencySearch<K: Field, R> {
    kernel: IncrementalKernel<K>,
    rows: HashMap<R, usize>,
    kept: Vec<Exponent>,
    pub(crate) examined: usize,
}

impl<K: Field, R: Hash + Eq> DependencySearch<K, R> {
    pub(crate) fn new() -> Self {
        DependencySearch { kernel: IncrementalKernel::new(), rows: HashMap::new(), kept: Vec::new(), examined: 0 }
    }

    /// Returns `(exponent, coefficient)` pairs of the relation if `image`
    /// depends on the images of the previously pushed exponents.
    pub(crate) fn push(
        &mut self,
        alpha: Exponent,
        image: impl IntoIterator<Item = (R, K)>,
    ) -> Option<Vec<(Exponent, K)>> {
        self.examined += 1;
        let mut col = BTreeMap::new();
        for (key, c) in image {
            let next = self.rows.len();
            let idx = *self.rows.entry(key).or_insert(next);
            col.insert(idx, c);
        }
        match self.kernel.push(&col) {
            None => {
                self.kept.push(alpha);
                None
            }
            Some(v) => {
                let mut out: Vec<(Exponent, K)> = self.kept.iter().cloned().zip(v.iter().cloned()).collect();
                out.push((alpha, v.last().cloned().expect("nonempty dependency")));
                Some(out)
            }
        }
    }
}

/// A nonzero `R` without constant term such that `R(P₁,…,P_N) = 0`.
///
/// Candidate monomials `t^α` with `1 ≤ |α|_∞ ≤ q` are expanded in graded
/// order and the search stops at the first linear dependency among the
/// expansions. Counting dimensions guarantees one exists before the
/// candidates run out.
pub fn find_relation<K: Field>(polys: &[MPoly<K>]) -> Result<Relation<K>, AlgDepError> {
    let n = polys.len();
    let k = polys.first().map_or(0, MPoly::nvars);
    if polys.iter().any(|p| p.nvars() != k) {
        return Err(AlgDepError::MixedArity);
    }
    if k == 0 || n <= k {
        return Err(AlgDepError::PreconditionViolated { n, k });
    }
    if let Some(i) = polys.iter().position(MPoly::is_zero) {
        return Err(AlgDepError::ZeroPolynomial(i));
    }
    let d = polys.iter().filter_map(MPoly::degree).max().unwrap_or(0);
    let q = choose_q(n, k, d);
    let cap = u32::try_from(q).expect("exponent cap fits in u32");

    let mut memo = ProductMemo::new(polys, k);
    let mut search = DependencySearch::<K, Exponent>::new();
    for deg in 1..=(n as u64 * q) as u32 {
        for alpha in exponents_of_degree(n, deg, cap) {
            let image = memo.get(&alpha);
            let entries: Vec<(Exponent, K)> = image.terms().map(|(e, c)| (e.clone(), c.clone())).collect();
            if let Some(rel) = search.push(alpha, entries) {
                let poly = MPoly::from_terms(n, rel);
                return Ok(Relation { poly, d, q, columns: search.examined });
            }
        }
    }
    unreachable!("more candidate monomials than available rows forces a dependency")
}
