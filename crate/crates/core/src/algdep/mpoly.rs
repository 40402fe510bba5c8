use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use super::field::Field;
use super::AlgDepError;

/// Exponent vector of a monomial.
pub type Exponent = Vec<u32>;

/// Sparse multivariate polynomial over an exact field, in canonical form
/// (no stored zero coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct MPoly<K: Field> {
    nvars: usize,
    terms: BTreeMap<Exponent, K>,
}

impl<K: Field> MPoly<K> {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: K) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    /// The variable `t_{i+1}`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, K::one())
    }

    pub fn monomial(exps: Exponent, c: K) -> Self {
        let mut p = MPoly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// Builds from `(exponent, coefficient)` pairs, accumulating repeats.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponent, K)>) -> Self {
        let mut p = MPoly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Exponent, c: K) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &K)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> K {
        self.terms.get(exps).cloned().unwrap_or_else(K::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn constant_term(&self) -> K {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn has_constant_term(&self) -> bool {
        !self.constant_term().is_zero()
    }

    /// Exponents with nonzero coefficient.
    pub fn support(&self) -> Vec<Exponent> {
        self.terms.keys().cloned().collect()
    }

    pub fn scale(&self, c: &K) -> Self {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-K::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = MPoly::constant(self.nvars, K::one());
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

    /// Substitutes `t_i ↦ P_i` and expands.
    pub fn compose(&self, polys: &[MPoly<K>]) -> Result<MPoly<K>, AlgDepError> {
        if polys.len() != self.nvars {
            return Err(AlgDepError::DimensionMismatch {
                expected: self.nvars,
                got: polys.len(),
            });
        }
        let k = match polys.first() {
            Some(p) => p.nvars,
            None => 0,
        };
        if polys.iter().any(|p| p.nvars != k) {
            return Err(AlgDepError::MixedArity);
        }
        let mut cache = PowerCache::new(polys);
        let mut out = MPoly::zero(k);
        for (e, c) in &self.terms {
            let m = cache.monomial(e);
            out = out.add(&m.scale(c));
        }
        Ok(out)
    }

    /// Evaluates at a point of any ring the coefficients map into.
    pub fn eval<T>(&self, point: &[T], lift: impl Fn(&K) -> T) -> T
    where
        T: Clone + Zero + One + std::ops::Mul<Output = T>,
    {
        assert_eq!(point.len(), self.nvars);
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut m = lift(c);
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    m = m * x.clone();
                }
            }
            acc = acc + m;
        }
        acc
    }

    pub fn map_coeffs<L: Field>(&self, f: impl Fn(&K) -> L) -> MPoly<L> {
        MPoly::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut obj = Map::new();
                obj.insert("exps".into(), json!(e));
                c.write_json(&mut obj);
                Value::Object(obj)
            })
            .collect();
        json!({ "nvars": self.nvars, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self, AlgDepError> {
        let bad = |m: &str| AlgDepError::Json(m.to_string());
        let nvars = v.get("nvars").and_then(Value::as_u64).ok_or_else(|| bad("missing nvars"))? as usize;
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
        let mut p = MPoly::zero(nvars);
        for t in terms {
            let obj = t.as_object().ok_or_else(|| bad("term is not an object"))?;
            let exps: Exponent = obj
                .get("exps")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("missing exps"))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as u32))
                .collect::<Option<_>>()
                .ok_or_else(|| bad("exps must be non-negative integers"))?;
            if exps.len() != nvars {
                return Err(bad("exponent length differs from nvars"));
            }
            let c = K::read_json(obj).ok_or_else(|| bad("bad coefficient"))?;
            p.add_term(exps, c);
        }
        Ok(p)
    }
}

impl<K: Field> fmt::Display for MPoly<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest degree first
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|a, b| super::grlex_desc(a.0, b.0));
        for (i, (e, c)) in items.into_iter().enumerate() {
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| if k == 1 { format!("t{}", j + 1) } else { format!("t{}^{}", j + 1, k) })
                .collect();
            if i > 0 {
                write!(f, " + ")?;
            }
            if vars.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", c, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Memoized powers `P_i^e` for repeated monomial substitution.
pub(crate) struct PowerCache<'a, K: Field> {
    polys: &'a [MPoly<K>],
    powers: Vec<Vec<MPoly<K>>>,
}

impl<'a, K: Field> PowerCache<'a, K> {
    pub(crate) fn new(polys: &'a [MPoly<K>]) -> Self {
        let powers = polys
            .iter()
            .map(|p| vec![MPoly::constant(p.nvars, K::one())])
            .collect();
        PowerCache { polys, powers }
    }

    pub(crate) fn power(&mut self, i: usize, e: u32) -> &MPoly<K> {
        while self.powers[i].len() <= e as usize {
            let next = self.powers[i].last().unwrap().mul(&self.polys[i]);
            self.powers[i].push(next);
        }
        &self.powers[i][e as usize]
    }

    pub(crate) fn monomial(&mut self, exps: &[u32]) -> MPoly<K> {
        let k = self.polys.first().map_or(0, |p| p.nvars);
        let mut acc = MPoly::constant(k, K::one());
        for (i, &e) in exps.iter().enumerate() {
            if e > 0 {
                acc = acc.mul(self.power(i, e));
            }
        }
        acc
    }
}
