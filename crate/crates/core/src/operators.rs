//! Operator expressions on the finite-support sequence space.
//!
//! Operators are kept as expression trees rather than matrices. Every node
//! maps finite-support vectors to finite-support vectors, so evaluation is
//! exact and needs no truncation dimension. Extensional equality is only
//! ever checked by probing; trees are never simplified.

use serde::{Deserialize, Serialize};

use crate::matrix::SmallMatrix;
use crate::sparse::{pair, SparseFunctional, SparseVector};
use crate::{Error, Result, Scalar};

/// `u ↦ u + Σᵢ φᵢ(u)·vᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteRankUpdate {
    pub pairs: Vec<(SparseVector, SparseFunctional)>,
}

impl FiniteRankUpdate {
    pub fn new(pairs: Vec<(SparseVector, SparseFunctional)>) -> Self {
        FiniteRankUpdate { pairs }
    }

    pub fn rank(&self) -> usize {
        self.pairs.len()
    }

    /// Gᵢⱼ = φᵢ(vⱼ).
    pub fn gram(&self) -> SmallMatrix {
        SmallMatrix::from_fn(self.rank(), |i, j| pair(&self.pairs[i].1, &self.pairs[j].0))
    }

    /// I_k + G, whose invertibility is equivalent to that of the update.
    pub fn capacitance(&self) -> SmallMatrix {
        let mut m = self.gram();
        for i in 0..self.rank() {
            let d = m.get(i, i) + Scalar::one();
            m.set(i, i, d);
        }
        m
    }

    pub fn apply(&self, u: &SparseVector) -> SparseVector {
        let mut out = u.clone();
        for (v, phi) in &self.pairs {
            out.add_scaled(&pair(phi, u), v);
        }
        out
    }

    pub fn dual_apply(&self, phi: &SparseFunctional) -> SparseFunctional {
        let mut out = phi.clone();
        for (v, psi) in &self.pairs {
            out.add_scaled(&pair(phi, v), psi);
        }
        out
    }
}

/// Inverse of a [`FiniteRankUpdate`] in low-rank-update form:
/// `u ↦ u − Σᵢⱼ Wᵢⱼ φⱼ(u)·vᵢ` with `W = (I_k + G)⁻¹`.
///
/// Only obtainable through [`invert`]; `W` is the witness that the base
/// update is invertible.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct InverseOfUpdate {
    base: FiniteRankUpdate,
    witness: SmallMatrix,
}

impl InverseOfUpdate {
    pub fn base(&self) -> &FiniteRankUpdate {
        &self.base
    }

    pub fn witness(&self) -> &SmallMatrix {
        &self.witness
    }

    pub fn apply(&self, u: &SparseVector) -> SparseVector {
        let coords: Vec<Scalar> = self.base.pairs.iter().map(|(_, phi)| pair(phi, u)).collect();
        let mut out = u.clone();
        for (i, (v, _)) in self.base.pairs.iter().enumerate() {
            let c: Scalar = coords.iter().enumerate().map(|(j, cj)| self.witness.get(i, j) * cj).sum();
            out.add_scaled(&-c, v);
        }
        out
    }

    pub fn dual_apply(&self, phi: &SparseFunctional) -> SparseFunctional {
        let coords: Vec<Scalar> = self.base.pairs.iter().map(|(v, _)| pair(phi, v)).collect();
        let mut out = phi.clone();
        for (j, (_, psi)) in self.base.pairs.iter().enumerate() {
            let c: Scalar = coords.iter().enumerate().map(|(i, ci)| ci * self.witness.get(i, j)).sum();
            out.add_scaled(&-c, psi);
        }
        out
    }
}

#[derive(Deserialize)]
struct InverseOfUpdateRepr {
    base: FiniteRankUpdate,
    witness: SmallMatrix,
}

impl<'de> Deserialize<'de> for InverseOfUpdate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = InverseOfUpdateRepr::deserialize(deserializer)?;
        let inv = invert(&repr.base).map_err(serde::de::Error::custom)?;
        if inv.witness != repr.witness {
            return Err(serde::de::Error::custom("inverse witness does not match its base update"));
        }
        Ok(inv)
    }
}

/// Forms the low-rank-update inverse of `op`.
pub fn invert(op: &FiniteRankUpdate) -> Result<InverseOfUpdate> {
    if op.rank() == 0 {
        return Err(Error::invalid("finite-rank update has no pairs"));
    }
    let witness = op.capacitance().inverse().ok_or_else(|| Error::NotInvertible("det(I + G) = 0".into()))?;
    Ok(InverseOfUpdate { base: op.clone(), witness })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorExpr {
    Identity,
    ScalarMultiple(Scalar),
    /// e₀ ↦ 0, eₖ ↦ eₖ₋₁.
    BackwardShift,
    /// eₖ ↦ eₖ₊₁.
    ForwardShift,
    FiniteRankUpdate(FiniteRankUpdate),
    /// Factors applied right-to-left, as in the product `A B C`.
    Compose(Vec<OperatorExpr>),
    InverseOfUpdate(InverseOfUpdate),
}

impl OperatorExpr {
    /// λ·B, the Rolewicz operator for |λ| > 1.
    pub fn weighted_backward_shift(lambda: Scalar) -> Self {
        OperatorExpr::Compose(vec![OperatorExpr::ScalarMultiple(lambda), OperatorExpr::BackwardShift])
    }

    pub fn apply(&self, u: &SparseVector) -> SparseVector {
        match self {
            OperatorExpr::Identity => u.clone(),
            OperatorExpr::ScalarMultiple(c) => u.scaled(c),
            OperatorExpr::BackwardShift => u.shifted_down(1),
            OperatorExpr::ForwardShift => u.shifted_up(1),
            OperatorExpr::FiniteRankUpdate(upd) => upd.apply(u),
            OperatorExpr::Compose(factors) => factors.iter().rev().fold(u.clone(), |acc, op| op.apply(&acc)),
            OperatorExpr::InverseOfUpdate(inv) => inv.apply(u),
        }
    }

    /// The dual operator: `⟨op′φ, u⟩ = ⟨φ, op u⟩`.
    pub fn dual_apply(&self, phi: &SparseFunctional) -> SparseFunctional {
        match self {
            OperatorExpr::Identity => phi.clone(),
            OperatorExpr::ScalarMultiple(c) => phi.scaled(c),
            OperatorExpr::BackwardShift => phi.shifted_up(1),
            OperatorExpr::ForwardShift => phi.shifted_down(1),
            OperatorExpr::FiniteRankUpdate(upd) => upd.dual_apply(phi),
            OperatorExpr::Compose(factors) => factors.iter().fold(phi.clone(), |acc, op| op.dual_apply(&acc)),
            OperatorExpr::InverseOfUpdate(inv) => inv.dual_apply(phi),
        }
    }

    pub fn power_apply(&self, u: &SparseVector, n: usize) -> SparseVector {
        self.orbit(u).nth(n).expect("orbit iterator is infinite")
    }

    pub fn dual_power_apply(&self, phi: &SparseFunctional, n: usize) -> SparseFunctional {
        (0..n).fold(phi.clone(), |acc, _| self.dual_apply(&acc))
    }

    /// `u, op u, op² u, …`
    pub fn orbit<'a>(&'a self, u: &SparseVector) -> Orbit<'a> {
        Orbit { op: self, next: Some(u.clone()) }
    }

    /// Structural inverse for the invertible forms.
    pub fn inverse(&self) -> Result<OperatorExpr> {
        match self {
            OperatorExpr::Identity => Ok(OperatorExpr::Identity),
            OperatorExpr::ScalarMultiple(c) => c
                .recip()
                .map(OperatorExpr::ScalarMultiple)
                .ok_or_else(|| Error::NotInvertible("zero scalar multiple".into())),
            OperatorExpr::BackwardShift | OperatorExpr::ForwardShift => {
                Err(Error::NotInvertible("shifts are not invertible".into()))
            }
            OperatorExpr::FiniteRankUpdate(upd) => Ok(OperatorExpr::InverseOfUpdate(invert(upd)?)),
            OperatorExpr::InverseOfUpdate(inv) => Ok(OperatorExpr::FiniteRankUpdate(inv.base.clone())),
            OperatorExpr::Compose(factors) => {
                Ok(OperatorExpr::Compose(factors.iter().rev().map(OperatorExpr::inverse).collect::<Result<_>>()?))
            }
        }
    }

    /// An exact upper bound on the squared operator norm in the ℓ² model.
    ///
    /// For `I + Σₜ rₜ` with rank-one terms of norm `√sₜ`, Cauchy–Schwarz gives
    /// `(1 + Σ√sₜ)² ≤ (T + 1)(1 + Σ sₜ)`, which avoids square roots.
    pub fn norm_sq_bound(&self) -> Scalar {
        fn perturbed_identity(terms: impl Iterator<Item = Scalar>) -> Scalar {
            let (count, total) = terms.fold((0i64, Scalar::one()), |(n, acc), s| (n + 1, acc + s));
            Scalar::from_integer(count + 1) * total
        }
        match self {
            OperatorExpr::Identity | OperatorExpr::BackwardShift | OperatorExpr::ForwardShift => Scalar::one(),
            OperatorExpr::ScalarMultiple(c) => c.square(),
            OperatorExpr::FiniteRankUpdate(upd) => {
                perturbed_identity(upd.pairs.iter().map(|(v, phi)| v.norm_sq() * phi.norm_sq()))
            }
            OperatorExpr::InverseOfUpdate(inv) => {
                let pairs = &inv.base.pairs;
                perturbed_identity((0..pairs.len()).flat_map(|i| {
                    (0..pairs.len()).filter_map(move |j| {
                        let w = inv.witness.get(i, j);
                        (!w.is_zero()).then(|| w.square() * pairs[i].0.norm_sq() * pairs[j].1.norm_sq())
                    })
                }))
            }
            OperatorExpr::Compose(factors) => factors.iter().map(OperatorExpr::norm_sq_bound).product(),
        }
    }
}

/// Successive iterates of an operator on a starting vector.
pub struct Orbit<'a> {
    op: &'a OperatorExpr,
    next: Option<SparseVector>,
}

impl Iterator for Orbit<'_> {
    type Item = SparseVector;

    fn next(&mut self) -> Option<SparseVector> {
        let current = self.next.take()?;
        self.next = Some(self.op.apply(&current));
        Some(current)
    }
}

/// `S T S⁻¹`.
pub fn conjugate(similarity: &OperatorExpr, base: &OperatorExpr) -> Result<OperatorExpr> {
    let inverse = similarity.inverse()?;
    Ok(OperatorExpr::Compose(vec![similarity.clone(), base.clone(), inverse]))
}

/// An m-tuple of operators on the same model space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<OperatorExpr>", into = "Vec<OperatorExpr>")]
pub struct OperatorTuple {
    ops: Vec<OperatorExpr>,
}

impl OperatorTuple {
    pub fn new(ops: Vec<OperatorExpr>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::invalid("operator tuple must have at least one member"));
        }
        Ok(OperatorTuple { ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ops(&self) -> &[OperatorExpr] {
        &self.ops
    }

    pub fn get(&self, j: usize) -> Option<&OperatorExpr> {
        self.ops.get(j)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, OperatorExpr> {
        self.ops.iter()
    }

    /// `(T₁u, …, T_m u)`.
    pub fn apply_diagonal(&self, u: &SparseVector) -> Vec<SparseVector> {
        self.ops.iter().map(|op| op.apply(u)).collect()
    }
}

impl TryFrom<Vec<OperatorExpr>> for OperatorTuple {
    type Error = Error;
    fn try_from(ops: Vec<OperatorExpr>) -> Result<Self> {
        OperatorTuple::new(ops)
    }
}

impl From<OperatorTuple> for Vec<OperatorExpr> {
    fn from(t: OperatorTuple) -> Self {
        t.ops
    }
}
