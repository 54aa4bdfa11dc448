use std::collections::btree_map::{self, Entry};
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{format_rational, Rational};

/// Finitely supported vector over an ordered basis. Zero coefficients are
/// never stored, so structural equality is vector equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseVector<K: Ord> {
    entries: BTreeMap<K, Rational>,
}

impl<K: Ord> Default for SparseVector<K> {
    fn default() -> Self {
        SparseVector {
            entries: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> SparseVector<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(key: K) -> Self {
        let mut v = Self::new();
        v.entries.insert(key, Rational::one());
        v
    }

    pub fn from_terms<I: IntoIterator<Item = (K, Rational)>>(terms: I) -> Self {
        let mut v = Self::new();
        for (k, c) in terms {
            v.add_term(k, &c);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &K) -> Rational {
        self.entries.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coefficient(&self, key: &K) -> Option<&Rational> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> btree_map::Iter<'_, K, Rational> {
        self.entries.iter()
    }

    pub fn keys(&self) -> btree_map::Keys<'_, K, Rational> {
        self.entries.keys()
    }

    /// Smallest key with a nonzero coefficient.
    pub fn leading(&self) -> Option<(&K, &Rational)> {
        self.entries.iter().next()
    }

    pub fn add_term(&mut self, key: K, c: &Rational) {
        if c.is_zero() {
            return;
        }
        match self.entries.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &SparseVector<K>, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (k, x) in &other.entries {
            self.add_term(k.clone(), &(x * c));
        }
    }

    pub fn add_assign(&mut self, other: &SparseVector<K>) {
        for (k, x) in &other.entries {
            self.add_term(k.clone(), x);
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        SparseVector {
            entries: self.entries.iter().map(|(k, x)| (k.clone(), x * c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        SparseVector {
            entries: self.entries.iter().map(|(k, x)| (k.clone(), -x)).collect(),
        }
    }

    pub fn sub(&self, other: &SparseVector<K>) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn map_keys<L: Ord + Clone, F: FnMut(&K) -> L>(&self, mut f: F) -> SparseVector<L> {
        let mut out = SparseVector::new();
        for (k, x) in &self.entries {
            out.add_term(f(k), x);
        }
        out
    }

    pub fn into_terms(self) -> impl Iterator<Item = (K, Rational)> {
        self.entries.into_iter()
    }
}

impl<K: Ord + Clone> FromIterator<(K, Rational)> for SparseVector<K> {
    fn from_iter<I: IntoIterator<Item = (K, Rational)>>(iter: I) -> Self {
        Self::from_terms(iter)
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for SparseVector<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(k, x)| (k, format_rational(x))))
            .finish()
    }
}

/// A subspace held in reduced row-echelon form: each row has leading
/// coefficient one at its pivot (its smallest key), and no row has a nonzero
/// entry at another row's pivot. The form is unique for a given subspace.
#[derive(Clone, PartialEq, Eq)]
pub struct SubspaceBasis<K: Ord> {
    rows: BTreeMap<K, SparseVector<K>>,
}

impl<K: Ord> Default for SubspaceBasis<K> {
    fn default() -> Self {
        SubspaceBasis {
            rows: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> SubspaceBasis<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Rows in increasing pivot order.
    pub fn rows(&self) -> impl Iterator<Item = &SparseVector<K>> {
        self.rows.values()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    /// Remainder of `v` after eliminating every pivot; zero iff `v` is in
    /// the span.
    pub fn reduce(&self, v: &SparseVector<K>) -> SparseVector<K> {
        let mut out = v.clone();
        for (k, c) in v.iter() {
            if let Some(row) = self.rows.get(k) {
                out.add_scaled(row, &-c);
            }
        }
        out
    }

    pub fn contains(&self, v: &SparseVector<K>) -> bool {
        // the pivot coefficients of v determine the only candidate combination
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span. Returns the new normalized row when the rank
    /// grew, `None` when `v` was already in the span.
    pub fn insert(&mut self, v: &SparseVector<K>) -> Option<SparseVector<K>> {
        let r = self.reduce(v);
        let (pivot, lead) = match r.leading() {
            None => return None,
            Some((k, c)) => (k.clone(), c.clone()),
        };
        let r = r.scaled(&lead.recip());
        for row in self.rows.values_mut() {
            if let Some(c) = row.coefficient(&pivot).cloned() {
                row.add_scaled(&r, &-c);
            }
        }
        self.rows.insert(pivot, r.clone());
        Some(r)
    }

    pub fn is_subspace_of(&self, other: &SubspaceBasis<K>) -> bool {
        self.rows.values().all(|r| other.contains(r))
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for SubspaceBasis<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows.values()).finish()
    }
}

/// Canonical RREF basis of the span of `vectors`; independent of input order.
pub fn rref_basis<'a, K, I>(vectors: I) -> SubspaceBasis<K>
where
    K: Ord + Clone + 'a,
    I: IntoIterator<Item = &'a SparseVector<K>>,
{
    let mut basis = SubspaceBasis::new();
    for v in vectors {
        basis.insert(v);
    }
    basis
}

/// Basis of `{x in Q^ncols : e . x = 0 for every equation e}`, one vector
/// per free column, in increasing order of the free column.
pub fn nullspace(equations: &[SparseVector<usize>], ncols: usize) -> Vec<SparseVector<usize>> {
    let basis = rref_basis(equations);
    let pivots: Vec<usize> = basis.pivots().copied().collect();
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = SparseVector::basis(free);
            for row in basis.rows() {
                let coeff = row.get(&free);
                if !coeff.is_zero() {
                    v.add_term(*row.leading().expect("nonzero row").0, &-coeff);
                }
            }
            v
        })
        .collect()
}
