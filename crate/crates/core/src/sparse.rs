//! Finite-support vectors and functionals on the sequence-space model.
//!
//! Both live in the same container, [`Sparse`], tagged with a zero-sized
//! marker so that a vector cannot be passed where a functional is expected.
//! Coordinates are indexed from 0 and stored in a `BTreeMap`, which keeps
//! iteration order (and therefore serialisation) deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Scalar;

/// Marker for elements of the space X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primal {}

/// Marker for elements of the dual space X'.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dual {}

pub trait Side: 'static {
    type Other: Side<Other = Self>;
    const BASIS_SUFFIX: &'static str;
}

impl Side for Primal {
    type Other = Dual;
    const BASIS_SUFFIX: &'static str = "";
}

impl Side for Dual {
    type Other = Primal;
    const BASIS_SUFFIX: &'static str = "*";
}

/// Finite map from coordinate index to non-zero [`Scalar`].
pub struct Sparse<K> {
    entries: BTreeMap<usize, Scalar>,
    kind: PhantomData<fn() -> K>,
}

pub type SparseVector = Sparse<Primal>;
pub type SparseFunctional = Sparse<Dual>;

impl<K> Sparse<K> {
    pub fn new() -> Self {
        Sparse { entries: BTreeMap::new(), kind: PhantomData }
    }

    /// The coordinate vector (or functional) at `index`.
    pub fn basis(index: usize) -> Self {
        Self::single(index, Scalar::one())
    }

    pub fn single(index: usize, value: Scalar) -> Self {
        let mut s = Self::new();
        s.insert(index, value);
        s
    }

    /// Builds from `(index, value)` pairs; repeated indices are summed and
    /// zeros dropped.
    pub fn from_entries<I: IntoIterator<Item = (usize, Scalar)>>(entries: I) -> Self {
        let mut s = Self::new();
        for (i, v) in entries {
            s.add_at(i, &v);
        }
        s
    }

    /// Dense constructor: `values[i]` becomes coordinate `i`.
    pub fn from_dense<I: IntoIterator<Item = Scalar>>(values: I) -> Self {
        Self::from_entries(values.into_iter().enumerate())
    }

    fn from_map(entries: BTreeMap<usize, Scalar>) -> Self {
        debug_assert!(entries.values().all(|v| !v.is_zero()));
        Sparse { entries, kind: PhantomData }
    }

    /// Overwrites coordinate `index`.
    pub fn insert(&mut self, index: usize, value: Scalar) {
        if value.is_zero() {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
    }

    fn add_at(&mut self, index: usize, value: &Scalar) {
        if value.is_zero() {
            return;
        }
        match self.entries.get_mut(&index) {
            Some(slot) => {
                *slot += value;
                if slot.is_zero() {
                    self.entries.remove(&index);
                }
            }
            None => {
                self.entries.insert(index, value.clone());
            }
        }
    }

    pub fn get(&self, index: usize) -> Option<&Scalar> {
        self.entries.get(&index)
    }

    /// Coordinate value, zero when absent.
    pub fn coeff(&self, index: usize) -> Scalar {
        self.entries.get(&index).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (usize, &Scalar)> + '_ {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn support(&self) -> impl DoubleEndedIterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_index(&self) -> Option<usize> {
        self.entries.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    /// One past the largest stored index (0 for the zero element).
    pub fn extent(&self) -> usize {
        self.max_index().map_or(0, |i| i + 1)
    }

    pub fn scaled(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        Self::from_map(self.entries.iter().map(|(i, v)| (*i, v * c)).collect())
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: &Scalar, other: &Self) {
        if c.is_zero() {
            return;
        }
        for (i, v) in other.iter() {
            self.add_at(i, &(v * c));
        }
    }

    /// Moves every coordinate down by `k`, dropping those below 0
    /// (the backward shift applied `k` times).
    pub fn shifted_down(&self, k: usize) -> Self {
        Self::from_map(self.entries.range(k..).map(|(i, v)| (i - k, v.clone())).collect())
    }

    /// Moves every coordinate up by `k` (the forward shift applied `k` times).
    pub fn shifted_up(&self, k: usize) -> Self {
        Self::from_map(self.entries.iter().map(|(i, v)| (i + k, v.clone())).collect())
    }

    /// Reinterprets the coefficient sequence on the other side of the pairing.
    pub fn transpose(&self) -> Sparse<<K as Side>::Other>
    where
        K: Side,
    {
        Sparse::from_map(self.entries.clone())
    }

    /// Exact Σ vᵢ².
    pub fn norm_sq(&self) -> Scalar {
        self.entries.values().map(Scalar::square).sum()
    }

    /// Exact Σ aᵢbᵢ between two coefficient sequences of the same side.
    pub fn dot(&self, other: &Self) -> Scalar {
        dot_maps(&self.entries, &other.entries)
    }

    /// Exact squared ℓ² distance ‖self − other‖².
    pub fn dist_sq(&self, other: &Self) -> Scalar {
        let mut acc = Scalar::zero();
        for (i, v) in self.iter() {
            match other.get(i) {
                Some(w) => acc += (v - w).square(),
                None => acc += v.square(),
            }
        }
        for (i, w) in other.iter() {
            if !self.entries.contains_key(&i) {
                acc += w.square();
            }
        }
        acc
    }
}

fn dot_maps(a: &BTreeMap<usize, Scalar>, b: &BTreeMap<usize, Scalar>) -> Scalar {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut acc = Scalar::zero();
    for (i, v) in small {
        if let Some(w) = large.get(i) {
            acc += v * w;
        }
    }
    acc
}

/// The pairing ⟨f, x⟩ = Σᵢ fᵢxᵢ.
pub fn pair(f: &SparseFunctional, x: &SparseVector) -> Scalar {
    dot_maps(&f.entries, &x.entries)
}

/// Exact Σᵢ xᵢ².
pub fn norm_sq(x: &SparseVector) -> Scalar {
    x.norm_sq()
}

/// Exact linear-independence test by sparse Gaussian elimination.
///
/// The empty list is independent.
pub fn linearly_independent<K>(vs: &[Sparse<K>]) -> bool {
    let mut basis: BTreeMap<usize, BTreeMap<usize, Scalar>> = BTreeMap::new();
    for v in vs {
        let mut row = v.entries.clone();
        loop {
            let Some((&lead, lead_val)) = row.iter().next() else {
                return false;
            };
            match basis.get(&lead) {
                Some(pivot_row) => {
                    // pivot rows are normalised to a leading 1
                    let factor = lead_val.clone();
                    for (j, pv) in pivot_row {
                        let slot = row.entry(*j).or_default();
                        *slot -= &(&factor * pv);
                        if slot.is_zero() {
                            row.remove(j);
                        }
                    }
                }
                None => {
                    let inv = lead_val.recip().expect("stored entries are non-zero");
                    for val in row.values_mut() {
                        *val *= &inv;
                    }
                    basis.insert(lead, row);
                    break;
                }
            }
        }
    }
    true
}

impl<K> Default for Sparse<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K> Clone for Sparse<K> {
    fn clone(&self) -> Self {
        Sparse { entries: self.entries.clone(), kind: PhantomData }
    }
}

impl<K> PartialEq for Sparse<K> {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl<K> Eq for Sparse<K> {}

impl<K> Hash for Sparse<K> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.entries.hash(state);
    }
}

impl<K: Side> fmt::Debug for Sparse<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Renders as a sum of basis elements, e.g. `1/2·e0 - e3` or `e1*`.
impl<K: Side> fmt::Display for Sparse<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (i, v)) in self.iter().enumerate() {
            let (sign, mag) = if v.is_negative() { ("-", v.abs()) } else { ("+", v.clone()) };
            match (n, sign) {
                (0, "-") => f.write_str("-")?,
                (0, _) => {}
                (_, s) => write!(f, " {s} ")?,
            }
            if !mag.is_one() {
                write!(f, "{mag}·")?;
            }
            write!(f, "e{i}{}", K::BASIS_SUFFIX)?;
        }
        Ok(())
    }
}

impl<K> Serialize for Sparse<K> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de, K> Deserialize<'de> for Sparse<K> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let entries = BTreeMap::<usize, Scalar>::deserialize(deserializer)?;
        if entries.values().any(Scalar::is_zero) {
            return Err(serde::de::Error::custom("explicit zero entry in sparse element"));
        }
        Ok(Self::from_map(entries))
    }
}

impl<K> Add for &Sparse<K> {
    type Output = Sparse<K>;
    fn add(self, rhs: &Sparse<K>) -> Sparse<K> {
        let mut out = self.clone();
        out.add_scaled(&Scalar::one(), rhs);
        out
    }
}

impl<K> Add for Sparse<K> {
    type Output = Sparse<K>;
    fn add(mut self, rhs: Sparse<K>) -> Sparse<K> {
        self.add_scaled(&Scalar::one(), &rhs);
        self
    }
}

impl<K> Sub for &Sparse<K> {
    type Output = Sparse<K>;
    fn sub(self, rhs: &Sparse<K>) -> Sparse<K> {
        let mut out = self.clone();
        out.add_scaled(&-Scalar::one(), rhs);
        out
    }
}

impl<K> Sub for Sparse<K> {
    type Output = Sparse<K>;
    fn sub(mut self, rhs: Sparse<K>) -> Sparse<K> {
        self.add_scaled(&-Scalar::one(), &rhs);
        self
    }
}

impl<K> Neg for &Sparse<K> {
    type Output = Sparse<K>;
    fn neg(self) -> Sparse<K> {
        self.scaled(&-Scalar::one())
    }
}

impl<K> Neg for Sparse<K> {
    type Output = Sparse<K>;
    fn neg(self) -> Sparse<K> {
        self.scaled(&-Scalar::one())
    }
}

impl<K> Mul<&Sparse<K>> for &Scalar {
    type Output = Sparse<K>;
    fn mul(self, rhs: &Sparse<K>) -> Sparse<K> {
        rhs.scaled(self)
    }
}

impl<K> Mul<Sparse<K>> for Scalar {
    type Output = Sparse<K>;
    fn mul(self, rhs: Sparse<K>) -> Sparse<K> {
        rhs.scaled(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(i: usize) -> SparseVector {
        SparseVector::basis(i)
    }

    fn es(i: usize) -> SparseFunctional {
        SparseFunctional::basis(i)
    }

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn vec_strategy() -> impl Strategy<Value = SparseVector> {
        proptest::collection::vec((0usize..6, -4i64..5, 1i64..4), 0..5)
            .prop_map(|es| SparseVector::from_entries(es.into_iter().map(|(i, n, d)| (i, q(n, d)))))
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(&es(0), &e(0)), Scalar::one());
        assert_eq!(pair(&es(0), &e(1)), Scalar::zero());
        let f = &es(0) + &SparseFunctional::single(1, 2.into());
        let x = &SparseVector::single(1, 3.into()) - &e(0);
        assert_eq!(pair(&f, &x), Scalar::from_integer(5));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_sq(&SparseVector::new()), Scalar::zero());
        assert_eq!(norm_sq(&e(3)), Scalar::one());
        let x = SparseVector::from_entries([(0, q(1, 2)), (5, q(-1, 2))]);
        assert_eq!(norm_sq(&x), q(1, 2));
    }

    #[test]
    fn independence_examples() {
        assert!(linearly_independent(&[e(0), e(1)]));
        assert!(!linearly_independent(&[e(0), e(0).scaled(&2.into())]));
        let a = &e(0) + &e(1);
        let b = &e(1) + &e(2);
        let c = SparseVector::from_dense([1.into(), 2.into(), 1.into()]);
        assert!(!linearly_independent(&[a, b, c]));
        assert!(!linearly_independent(&[SparseVector::new()]));
        assert!(linearly_independent::<Primal>(&[]));
    }

    #[test]
    fn canonical_form_drops_zeros() {
        let x = SparseVector::from_entries([(2, q(1, 1)), (2, q(-1, 1)), (4, Scalar::zero())]);
        assert!(x.is_zero());
        assert_eq!(x, SparseVector::new());
        let y = &e(1) - &e(1);
        assert_eq!(y.nnz(), 0);
    }

    #[test]
    fn shifts() {
        let x = SparseVector::from_entries([(0, q(1, 1)), (3, q(2, 1))]);
        assert_eq!(x.shifted_down(1), SparseVector::single(2, 2.into()));
        assert_eq!(x.shifted_up(2), SparseVector::from_entries([(2, q(1, 1)), (5, q(2, 1))]));
        assert_eq!(x.extent(), 4);
    }

    #[test]
    fn display() {
        let x = SparseVector::from_entries([(0, q(1, 2)), (3, q(-1, 1))]);
        assert_eq!(x.to_string(), "1/2·e0 - e3");
        assert_eq!(es(1).to_string(), "e1*");
        assert_eq!(SparseVector::new().to_string(), "0");
    }

    #[test]
    fn serde_rejects_explicit_zero() {
        let bad: Result<SparseVector, _> = serde_json::from_str(r#"{"1":"0/1"}"#);
        assert!(bad.is_err());
        let ok: SparseVector = serde_json::from_str(r#"{"1":"1/2"}"#).unwrap();
        assert_eq!(ok, SparseVector::single(1, q(1, 2)));
    }

    proptest! {
        #[test]
        fn pair_is_bilinear(
            a in (-5i64..5, 1i64..4), b in (-5i64..5, 1i64..4),
            f in vec_strategy(), x in vec_strategy(), y in vec_strategy(),
        ) {
            let (a, b) = (q(a.0, a.1), q(b.0, b.1));
            let f = f.transpose();
            let combo = &x.scaled(&a) + &y.scaled(&b);
            prop_assert_eq!(pair(&f, &combo), &a * pair(&f, &x) + &b * pair(&f, &y));
        }

        #[test]
        fn norm_is_self_pairing(x in vec_strategy()) {
            prop_assert_eq!(norm_sq(&x), pair(&x.transpose(), &x));
        }

        #[test]
        fn dist_sq_matches_difference(x in vec_strategy(), y in vec_strategy()) {
            prop_assert_eq!(x.dist_sq(&y), norm_sq(&(&x - &y)));
        }
    }
}
