//! Multi-index sets, injective weight functionals and the distinguished index.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub type MultiIndex = Vec<u32>;

/// Weight numerators are drawn from `[2^16, 2^17]` over `2^16`, so `kᵢ ∈ [1, 2]`.
const WEIGHT_DEN: u64 = 1 << 16;
const MAX_DRAWS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("multi-index set is empty")]
    Empty,
    #[error("the zero multi-index is not allowed")]
    ZeroIndex,
    #[error("multi-index {0:?} has the wrong length (expected {1})")]
    WrongLength(MultiIndex, usize),
    #[error("no injective weights after {0} draws")]
    RetryLimitExceeded(usize),
    #[error("weights are not injective on the set")]
    WeightsNotInjective,
    #[error("weight vector has length {0}, expected {1}")]
    WeightLength(usize, usize),
    #[error("malformed multi-index set: {0}")]
    Malformed(String),
}

/// Finite `A ⊂ ℕ₀^N ∖ {0}`, stored sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiIndexSet {
    n: usize,
    elems: Vec<MultiIndex>,
}

impl MultiIndexSet {
    pub fn new(n: usize, elems: impl IntoIterator<Item = MultiIndex>) -> Result<Self, IndexError> {
        let set: BTreeSet<MultiIndex> = elems.into_iter().collect();
        if set.is_empty() {
            return Err(IndexError::Empty);
        }
        for a in &set {
            if a.len() != n {
                return Err(IndexError::WrongLength(a.clone(), n));
            }
            if a.iter().all(|&x| x == 0) {
                return Err(IndexError::ZeroIndex);
            }
        }
        Ok(MultiIndexSet { n, elems: set.into_iter().collect() })
    }

    /// Dimension taken from the first element.
    pub fn from_vec(elems: Vec<MultiIndex>) -> Result<Self, IndexError> {
        let n = elems.first().ok_or(IndexError::Empty)?.len();
        Self::new(n, elems)
    }

    /// Parses a JSON array of integer arrays, e.g. `[[2,0],[0,1]]`.
    pub fn from_json(s: &str) -> Result<Self, IndexError> {
        let v: Vec<MultiIndex> = serde_json::from_str(s).map_err(|e| IndexError::Malformed(e.to_string()))?;
        Self::from_vec(v)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn elems(&self) -> &[MultiIndex] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// `M_A = max |α|_∞`
    pub fn m_a(&self) -> u32 {
        self.elems.iter().flat_map(|a| a.iter().copied()).max().unwrap_or(0)
    }

    /// `i_A`, zero-based: the least coordinate attaining `M_A`.
    pub fn i_a(&self) -> usize {
        let m = self.m_a();
        (0..self.n).find(|&j| self.elems.iter().any(|a| a[j] == m)).expect("nonempty set attains its max")
    }

    /// `d_A = max |α|₁`
    pub fn d_a(&self) -> u32 {
        self.elems.iter().map(|a| a.iter().sum()).max().unwrap_or(0)
    }
}

/// Positive rational weights `k`, defining `α ↦ Σ kᵢαᵢ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights(pub Vec<BigRational>);

impl Serialize for Weights {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.0.iter().map(|q| q.to_string()).collect();
        strs.serialize(s)
    }
}

impl Weights {
    pub fn from_ints(v: &[i64]) -> Self {
        Weights(v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn functional(&self, alpha: &[u32]) -> BigRational {
        self.0
            .iter()
            .zip(alpha)
            .fold(BigRational::zero(), |acc, (k, &a)| acc + k * BigRational::from_integer(a.into()))
    }

    /// Exact pairwise distinctness of the functional on `a`.
    pub fn is_injective_on(&self, a: &MultiIndexSet) -> bool {
        if self.0.len() != a.dim() {
            return false;
        }
        let mut values: Vec<BigRational> = a.elems().iter().map(|x| self.functional(x)).collect();
        values.sort();
        values.windows(2).all(|w| w[0] != w[1])
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        Weights(self.0.iter().map(|k| k * c).collect())
    }
}

/// Rejection-samples weights with `kᵢ ∈ [1, 2]` of denominator `2^16` until the
/// functional is injective on `a`. Colliding weights form finitely many
/// hyperplanes, so a handful of draws is expected.
pub fn find_injective_weights(a: &MultiIndexSet, seed: u64) -> Result<Weights, IndexError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let k = Weights(
            (0..a.dim())
                .map(|_| {
                    let num = rng.random_range(WEIGHT_DEN..=2 * WEIGHT_DEN);
                    BigRational::new(BigInt::from(num), BigInt::from(WEIGHT_DEN))
                })
                .collect(),
        );
        if k.is_injective_on(a) {
            return Ok(k);
        }
    }
    Err(IndexError::RetryLimitExceeded(MAX_DRAWS))
}

/// `β` together with `M_A`, `i_A` (zero-based) and `d_A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelectedIndex {
    pub beta: MultiIndex,
    pub m_a: u32,
    pub i_a: usize,
    pub d_a: u32,
}

impl SelectedIndex {
    /// `I_N`: every coordinate except `i_A`.
    pub fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.beta.len()).filter(move |&i| i != self.i_a)
    }
}

/// Picks `β`, the unique minimizer of the weight functional among the
/// `α ∈ A` with `α_{i_A} = M_A`, and checks that every other such `α` has
/// `Σ_{i≠i_A} kᵢ(βᵢ − αᵢ) < 0`.
pub fn select_beta(a: &MultiIndexSet, k: &Weights) -> Result<SelectedIndex, IndexError> {
    if k.0.len() != a.dim() {
        return Err(IndexError::WeightLength(k.0.len(), a.dim()));
    }
    if !k.is_injective_on(a) {
        return Err(IndexError::WeightsNotInjective);
    }
    let (m_a, i_a, d_a) = (a.m_a(), a.i_a(), a.d_a());
    let candidates: Vec<&MultiIndex> = a.elems().iter().filter(|x| x[i_a] == m_a).collect();
    let beta = candidates
        .iter()
        .min_by_key(|x| k.functional(x))
        .map(|x| (*x).clone())
        .expect("i_A is attained");
    for alpha in candidates.iter().filter(|x| ***x != beta) {
        let gap = (0..a.dim())
            .filter(|&i| i != i_a)
            .fold(BigRational::zero(), |acc, i| {
                acc + &k.0[i] * BigRational::from_integer(BigInt::from(beta[i] as i64 - alpha[i] as i64))
            });
        if gap >= BigRational::zero() {
            return Err(IndexError::WeightsNotInjective);
        }
    }
    Ok(SelectedIndex { beta, m_a, i_a, d_a })
}

/// Rejects `A` unless it consists of nonzero multi-indices (the support of a
/// polynomial without constant term).
pub fn is_admissible(a: &[MultiIndex]) -> bool {
    !a.is_empty() && a.iter().all(|x| x.iter().any(|&v| v > 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[&[u32]]) -> MultiIndexSet {
        MultiIndexSet::from_vec(v.iter().map(|x| x.to_vec()).collect()).unwrap()
    }

    #[test]
    fn weight_examples() {
        let a = set(&[&[1, 0], &[0, 1]]);
        assert!(Weights::from_ints(&[1, 2]).is_injective_on(&a));
        let b = set(&[&[1, 1], &[2, 0], &[0, 2]]);
        assert!(Weights::from_ints(&[1, 2]).is_injective_on(&b));
        let c = set(&[&[2, 0], &[0, 2]]);
        assert!(!Weights::from_ints(&[1, 1]).is_injective_on(&c));
        let k = find_injective_weights(&c, 7).unwrap();
        assert!(k.is_injective_on(&c));
        let one = BigRational::from_integer(1.into());
        let two = BigRational::from_integer(2.into());
        assert!(k.0.iter().all(|x| *x >= one && *x <= two));
        assert_eq!(k, find_injective_weights(&c, 7).unwrap());
    }

    #[test]
    fn beta_examples() {
        let a = set(&[&[2, 0], &[0, 2], &[2, 1]]);
        let k = find_injective_weights(&a, 1).unwrap();
        let s = select_beta(&a, &k).unwrap();
        assert_eq!((s.beta.clone(), s.m_a, s.i_a, s.d_a), (vec![2, 0], 2, 0, 3));

        let single = set(&[&[1, 1]]);
        let s = select_beta(&single, &Weights::from_ints(&[1, 1])).unwrap();
        assert_eq!((s.beta, s.m_a, s.i_a, s.d_a), (vec![1, 1], 1, 0, 2));

        let a = set(&[&[1, 0], &[0, 1]]);
        let s = select_beta(&a, &Weights::from_ints(&[1, 2])).unwrap();
        assert_eq!((s.beta, s.m_a, s.i_a), (vec![1, 0], 1, 0));
        assert_eq!(select_beta(&a, &Weights::from_ints(&[1, 1])), Err(IndexError::WeightsNotInjective));
    }

    #[test]
    fn set_validation() {
        assert_eq!(MultiIndexSet::from_vec(vec![]), Err(IndexError::Empty));
        assert_eq!(MultiIndexSet::from_vec(vec![vec![0, 0]]), Err(IndexError::ZeroIndex));
        assert!(matches!(MultiIndexSet::from_vec(vec![vec![1], vec![1, 0]]), Err(IndexError::WrongLength(..))));
        let a = MultiIndexSet::from_json("[[2,0],[0,1],[2,0]]").unwrap();
        assert_eq!(a.len(), 2);
        assert!(MultiIndexSet::from_json("[[1,").is_err());
        assert_eq!(a.i_a(), 0);
        let b = set(&[&[0, 3], &[1, 1]]);
        assert_eq!((b.m_a(), b.i_a(), b.d_a()), (3, 1, 3));
    }

    fn arb_set() -> impl Strategy<Value = MultiIndexSet> {
        (1usize..=6).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec(0u32..=10, n), 1..=40).prop_filter_map("nonzero", move |v| {
                let v: Vec<_> = v.into_iter().filter(|x| x.iter().any(|&e| e > 0)).collect();
                MultiIndexSet::new(n, v).ok()
            })
        })
    }

    proptest! {
        #[test]
        fn beta_is_exhaustive_argmin(a in arb_set(), seed in any::<u64>()) {
            let k = find_injective_weights(&a, seed).unwrap();
            prop_assert!(k.is_injective_on(&a));
            let s = select_beta(&a, &k).unwrap();
            let m = a.m_a();
            let mut best: Option<(BigRational, &MultiIndex)> = None;
            for x in a.elems() {
                if x[s.i_a] == m {
                    let v = k.functional(x);
                    if best.as_ref().is_none_or(|(b, _)| v < *b) {
                        best = Some((v, x));
                    }
                }
            }
            prop_assert_eq!(&s.beta, best.unwrap().1);
            let scaled = k.scaled(&BigRational::new(3.into(), 7.into()));
            prop_assert_eq!(select_beta(&a, &scaled).unwrap().beta, s.beta);
        }
    }
}
