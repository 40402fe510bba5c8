//! Fraction-free incremental column elimination.
//!
//! Columns are fed one at a time. Each is reduced against the pivots found so
//! far; the first column that reduces to zero yields the unique dependency
//! expressing it through the earlier (independent) columns. With the columns
//! in a fixed order that vector is the first kernel basis vector of the
//! reduced row echelon form.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::field::{Field, IntDomain};

type SparseVec<T> = BTreeMap<usize, T>;

struct Pivot<I> {
    row: usize,
    vec: SparseVec<I>,
    combo: SparseVec<I>,
}

pub struct IncrementalKernel<K: Field> {
    pivots: Vec<Pivot<K::Int>>,
    /// per column: the integer scale applied to clear denominators
    scales: Vec<BigInt>,
}

impl<K: Field> Default for IncrementalKernel<K> {
    fn default() -> Self {
        Self::new()
    }
}

fn axpy<I: IntDomain>(a: &I, x: &SparseVec<I>, b: &I, y: &SparseVec<I>) -> SparseVec<I> {
    // a·x − b·y
    let mut out = SparseVec::new();
    let mut xi = x.iter().peekable();
    let mut yi = y.iter().peekable();
    loop {
        let next = match (xi.peek(), yi.peek()) {
            (None, None) => break,
            (Some(&(i, _)), None) => (*i, true, false),
            (None, Some(&(j, _))) => (*j, false, true),
            (Some(&(i, _)), Some(&(j, _))) => {
                if i < j {
                    (*i, true, false)
                } else if j < i {
                    (*j, false, true)
                } else {
                    (*i, true, true)
                }
            }
        };
        let (idx, from_x, from_y) = next;
        let mut v = I::zero();
        if from_x {
            v = a.clone() * xi.next().unwrap().1.clone();
        }
        if from_y {
            v = v - b.clone() * yi.next().unwrap().1.clone();
        }
        if !v.is_zero() {
            out.insert(idx, v);
        }
    }
    out
}

fn remove_content<I: IntDomain>(vec: &mut SparseVec<I>, combo: &mut SparseVec<I>) {
    let mut g = BigInt::zero();
    for v in vec.values().chain(combo.values()) {
        g = g.gcd(&v.content());
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for v in vec.values_mut().chain(combo.values_mut()) {
        *v = v.div_int(&g);
    }
}

impl<K: Field> IncrementalKernel<K> {
    pub fn new() -> Self {
        IncrementalKernel { pivots: Vec::new(), scales: Vec::new() }
    }

    /// Number of columns fed so far.
    pub fn columns(&self) -> usize {
        self.scales.len()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Adds a sparse column (row index → entry). Returns the dependency
    /// vector (one entry per column so far, last entry one) if the column lies
    /// in the span of the previous ones; otherwise records a new pivot.
    pub fn push(&mut self, column: &BTreeMap<usize, K>) -> Option<Vec<K>> {
        let col_idx = self.scales.len();
        let scale = column
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(&c.denom()));
        let mut vec: SparseVec<K::Int> = column
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(&r, c)| (r, c.to_int(&scale)))
            .collect();
        self.scales.push(scale);
        let mut combo: SparseVec<K::Int> = SparseVec::new();
        combo.insert(col_idx, K::one().to_int(&BigInt::one()));

        for p in &self.pivots {
            let Some(entry) = vec.get(&p.row).cloned() else { continue };
            let lead = p.vec[&p.row].clone();
            vec = axpy(&lead, &vec, &entry, &p.vec);
            combo = axpy(&lead, &combo, &entry, &p.combo);
            remove_content(&mut vec, &mut combo);
        }

        match vec.keys().next().copied() {
            Some(row) => {
                self.pivots.push(Pivot { row, vec, combo });
                None
            }
            None => {
                // Σ combo_j · s_j · col_j = 0, normalized so the new column has weight one
                let lift = |b: &BigInt| K::from_rational(BigRational::from_integer(b.clone()));
                let own = K::from_int(&combo[&col_idx]) * lift(&self.scales[col_idx]);
                let out = (0..=col_idx)
                    .map(|j| match combo.get(&j) {
                        Some(x) => K::from_int(x) * lift(&self.scales[j]) / own.clone(),
                        None => K::zero(),
                    })
                    .collect();
                self.scales.pop();
                Some(out)
            }
        }
    }
}

/// First kernel vector of the matrix whose columns are given in order, or
/// `None` if the columns are independent.
pub fn first_kernel_vector<K: Field>(columns: &[BTreeMap<usize, K>]) -> Option<Vec<K>> {
    let mut kernel = IncrementalKernel::new();
    for col in columns {
        if let Some(mut v) = kernel.push(col) {
            v.resize(columns.len(), K::zero());
            return Some(v);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algdep::field::GaussRat;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn col(entries: &[(usize, BigRational)]) -> BTreeMap<usize, BigRational> {
        entries.iter().cloned().collect()
    }

    fn apply(columns: &[BTreeMap<usize, BigRational>], x: &[BigRational]) -> BTreeMap<usize, BigRational> {
        let mut out = BTreeMap::new();
        for (c, xi) in columns.iter().zip(x) {
            for (&r, v) in c {
                let e = out.entry(r).or_insert_with(BigRational::zero);
                *e = e.clone() + v.clone() * xi.clone();
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    #[test]
    fn finds_dependency_with_unit_last_entry() {
        let cols = vec![
            col(&[(0, q(1, 2)), (1, q(1, 1))]),
            col(&[(1, q(2, 3))]),
            col(&[(0, q(3, 2)), (1, q(5, 1))]),
        ];
        let v = first_kernel_vector(&cols).unwrap();
        assert_eq!(v[2], q(1, 1));
        assert!(apply(&cols, &v).is_empty());
        // col2 = 3 col0 + 3 col1
        assert_eq!(v[0], q(-3, 1));
        assert_eq!(v[1], q(-3, 1));
    }

    #[test]
    fn independent_columns() {
        let cols = vec![col(&[(0, q(1, 1))]), col(&[(1, q(7, 3))]), col(&[(0, q(1, 1)), (2, q(1, 1))])];
        assert!(first_kernel_vector(&cols).is_none());
        let mut k = IncrementalKernel::<BigRational>::new();
        for c in &cols {
            assert!(k.push(c).is_none());
        }
        assert_eq!(k.rank(), 3);
        assert_eq!(k.columns(), 3);
    }

    #[test]
    fn zero_column_is_immediately_dependent() {
        let cols = vec![col(&[(0, q(1, 1))]), col(&[])];
        let v = first_kernel_vector(&cols).unwrap();
        assert_eq!(v, vec![q(0, 1), q(1, 1)]);
    }

    #[test]
    fn gaussian_columns() {
        let i = GaussRat::new(q(0, 1), q(1, 1));
        let one = GaussRat::from_ints(1, 0);
        let a: BTreeMap<usize, GaussRat> = [(0, one.clone()), (1, i.clone())].into_iter().collect();
        let b: BTreeMap<usize, GaussRat> = [(0, i.clone()), (1, -one.clone())].into_iter().collect();
        // b = i·a
        let v = first_kernel_vector(&[a, b]).unwrap();
        assert_eq!(v[0], -i);
        assert_eq!(v[1], one);
    }
}
