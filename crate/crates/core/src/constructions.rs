//! Similarity constructions and the conjugation pipelines.
//!
//! A disjoint hypercyclic tuple is obtained from a hypercyclic direct sum
//! `T^{⊕m}` with hypercyclic vector `(x₁, …, x_m)`: pick invertible `Sⱼ`
//! with `Sⱼxⱼ = x` for one common `x`, and the conjugates `Rⱼ = SⱼTSⱼ⁻¹`
//! share the diagonal hypercyclic vector `(x, …, x)`. The maps `Sⱼ` here are
//! rank-≤2 updates of the identity, so everything stays exact.

use serde::{Deserialize, Serialize};

use crate::matrix::SmallMatrix;
use crate::operators::{conjugate, invert, FiniteRankUpdate, InverseOfUpdate, OperatorExpr, OperatorTuple};
use crate::sparse::{linearly_independent, pair, SparseFunctional, SparseVector};
use crate::synthesis::{synthesize, SynthesisCertificate, TargetSchedule};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientTriple {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
}

impl CoefficientTriple {
    /// aα + bβ = −1, bα + cβ = 1 and aβ + bγ ≠ 0.
    pub fn satisfies(&self, alpha: &Scalar, beta: &Scalar, gamma: &Scalar) -> bool {
        let CoefficientTriple { a, b, c } = self;
        a * alpha + b * beta == Scalar::from_integer(-1)
            && b * alpha + c * beta == Scalar::one()
            && !(a * beta + b * gamma).is_zero()
    }
}

/// Coefficients (a, b, c) for the dual-transitive map.
///
/// Requires `(α, β) ≠ (0, 0)` and `(β, γ) ≠ (0, 0)`.
pub fn solve_coefficients(alpha: &Scalar, beta: &Scalar, gamma: &Scalar) -> Result<CoefficientTriple> {
    if alpha.is_zero() && beta.is_zero() {
        return Err(Error::invalid("(α, β) = (0, 0)"));
    }
    if beta.is_zero() && gamma.is_zero() {
        return Err(Error::invalid("(β, γ) = (0, 0)"));
    }
    let triple = match beta.recip() {
        Some(beta_inv) if !gamma.is_zero() => {
            CoefficientTriple { a: Scalar::zero(), b: -&beta_inv, c: (alpha + beta) * beta_inv.square() }
        }
        Some(beta_inv) => CoefficientTriple {
            a: Scalar::one(),
            b: -(Scalar::one() + alpha) * &beta_inv,
            c: (alpha + beta + alpha.square()) * beta_inv.square(),
        },
        None => {
            let alpha_inv = alpha.recip().expect("α ≠ 0 when β = 0");
            CoefficientTriple { a: -&alpha_inv, b: alpha_inv, c: Scalar::zero() }
        }
    };
    debug_assert!(triple.satisfies(alpha, beta, gamma));
    Ok(triple)
}

/// Functionals `f, g` with `f(x) = g(y) = 1` and `f(y) = g(x) = 0`,
/// supported on the first coordinate pair (in lexicographic order) where
/// `x` and `y` form an invertible 2×2 block.
pub fn biorthogonal_pair(x: &SparseVector, y: &SparseVector) -> Result<(SparseFunctional, SparseFunctional)> {
    if !linearly_independent(&[x.clone(), y.clone()]) {
        return Err(Error::invalid("x and y are linearly dependent"));
    }
    let mut coords: Vec<usize> = x.support().chain(y.support()).collect();
    coords.sort_unstable();
    coords.dedup();
    for (n, &i) in coords.iter().enumerate() {
        for &j in &coords[n + 1..] {
            let (xi, xj, yi, yj) = (x.coeff(i), x.coeff(j), y.coeff(i), y.coeff(j));
            let det = &xi * &yj - &xj * &yi;
            let Some(inv) = det.recip() else { continue };
            // [f g] = [[xᵢ, xⱼ], [yᵢ, yⱼ]]⁻¹
            let f = SparseFunctional::from_entries([(i, &yj * &inv), (j, -(&yi * &inv))]);
            let g = SparseFunctional::from_entries([(i, -(&xj * &inv)), (j, &xi * &inv)]);
            return Ok((f, g));
        }
    }
    unreachable!("independent vectors always have an invertible 2×2 minor")
}

/// An invertible `S` with `Sx = y`.
///
/// For colinear `y = λx` this is `λI`; otherwise the rank-two update
/// `Su = u + (g − f)(u)x + (f − g)(u)y` built from a biorthogonal pair.
pub fn transitive_map(x: &SparseVector, y: &SparseVector) -> Result<OperatorExpr> {
    if x.is_zero() || y.is_zero() {
        return Err(Error::invalid("transitive_map needs non-zero vectors"));
    }
    if !linearly_independent(&[x.clone(), y.clone()]) {
        let i = x.min_index().expect("x is non-zero");
        let lambda = y.coeff(i) / x.coeff(i);
        return Ok(OperatorExpr::ScalarMultiple(lambda));
    }
    let (f, g) = biorthogonal_pair(x, y)?;
    let update = FiniteRankUpdate::new(vec![(x.clone(), &g - &f), (y.clone(), &f - &g)]);
    invert(&update)?;
    Ok(OperatorExpr::FiniteRankUpdate(update))
}

/// Matrix of `S` restricted to `N = span{x, y}` in the basis `{x, y}`,
/// read off by applying `S` and decomposing with a biorthogonal pair.
/// Fails if `S` does not map `N` into itself.
pub fn restriction_matrix(s: &OperatorExpr, x: &SparseVector, y: &SparseVector) -> Result<SmallMatrix> {
    let (fx, fy) = biorthogonal_pair(x, y)?;
    let mut rows = vec![vec![Scalar::zero(); 2]; 2];
    for (col, v) in [x, y].into_iter().enumerate() {
        let image = s.apply(v);
        let (cx, cy) = (pair(&fx, &image), pair(&fy, &image));
        let rebuilt = &x.scaled(&cx) + &y.scaled(&cy);
        if rebuilt != image {
            return Err(Error::PostconditionFailed("span{x, y} is not invariant".into()));
        }
        rows[0][col] = cx;
        rows[1][col] = cy;
    }
    Ok(SmallMatrix::from_rows(rows))
}

/// Output of [`dual_transitive_map`] with the data its postconditions used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualTransitiveMap {
    pub update: FiniteRankUpdate,
    pub inverse: InverseOfUpdate,
    pub coefficients: CoefficientTriple,
    /// Restriction of `S` to span{x, y} in the basis {x, y}.
    pub restriction: SmallMatrix,
}

impl DualTransitiveMap {
    pub fn operator(&self) -> OperatorExpr {
        OperatorExpr::FiniteRankUpdate(self.update.clone())
    }

    pub fn inverse_operator(&self) -> OperatorExpr {
        OperatorExpr::InverseOfUpdate(self.inverse.clone())
    }
}

/// An invertible `S` with `Sx = y` and `S′f = g`:
///
/// ```text
/// Su = u + a f(u) x + b f(u) y + b g(u) x + c g(u) y
/// ```
///
/// with (a, b, c) from [`solve_coefficients`] on
/// `(α, β, γ) = (f(x), g(x), g(y))`. Needs `f(y) = g(x)` and
/// `f(x)g(y) ≠ f(y)g(x)`.
pub fn dual_transitive_map(
    x: &SparseVector,
    y: &SparseVector,
    f: &SparseFunctional,
    g: &SparseFunctional,
) -> Result<DualTransitiveMap> {
    let (fx, fy, gx, gy) = (pair(f, x), pair(f, y), pair(g, x), pair(g, y));
    if fy != gx {
        return Err(Error::invalid(format!("f(y) = {fy} differs from g(x) = {gx}")));
    }
    if &fx * &gy == &fy * &gx {
        return Err(Error::invalid("f(x)g(y) = f(y)g(x)"));
    }
    let coefficients = solve_coefficients(&fx, &gx, &gy)?;
    let CoefficientTriple { a, b, c } = &coefficients;
    let update =
        FiniteRankUpdate::new(vec![(x.clone(), &f.scaled(a) + &g.scaled(b)), (y.clone(), &f.scaled(b) + &g.scaled(c))]);
    let op = OperatorExpr::FiniteRankUpdate(update.clone());

    if op.apply(x) != *y {
        return Err(Error::PostconditionFailed("Sx ≠ y".into()));
    }
    if op.dual_apply(f) != *g {
        return Err(Error::PostconditionFailed("S′f ≠ g".into()));
    }
    let restriction = restriction_matrix(&op, x, y)?;
    let det = restriction.det();
    let predicted = -(a * &gx + b * &gy);
    if det != predicted || det.is_zero() {
        return Err(Error::PostconditionFailed(format!("det M = {det}, expected non-zero {predicted}")));
    }
    let inverse = invert(&update)?;
    Ok(DualTransitiveMap { update, inverse, coefficients, restriction })
}

/// `(S₁TS₁⁻¹, …, S_mTS_m⁻¹)`.
pub fn conjugate_tuple(base: &OperatorExpr, similarities: &[OperatorExpr]) -> Result<OperatorTuple> {
    let ops = similarities.iter().map(|s| conjugate(s, base)).collect::<Result<Vec<_>>>()?;
    OperatorTuple::new(ops)
}

/// The dual side of a dual-disjoint construction: `Sⱼ′f = fⱼ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualData {
    pub functional: SparseFunctional,
    pub functionals: Vec<SparseFunctional>,
}

/// A conjugated tuple together with everything needed to audit it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointTupleArtifact {
    pub base: OperatorExpr,
    pub tuple: OperatorTuple,
    /// The x with Sⱼxⱼ = x for every j.
    pub common_vector: SparseVector,
    pub similarities: Vec<OperatorExpr>,
    /// x₁, …, x_m.
    pub sources: Vec<SparseVector>,
    /// cⱼ with xⱼ = cⱼ·(j-th synthesised vector).
    pub scales: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualData>,
}

impl DisjointTupleArtifact {
    pub fn arity(&self) -> usize {
        self.tuple.len()
    }

    /// `Sⱼxⱼ = x` for all j, and matching lengths throughout.
    pub fn is_consistent(&self) -> bool {
        let m = self.tuple.len();
        self.similarities.len() == m
            && self.sources.len() == m
            && self.scales.len() == m
            && self.dual.as_ref().is_none_or(|d| d.functionals.len() == m)
            && self.similarities.iter().zip(&self.sources).all(|(s, x)| s.apply(x) == self.common_vector)
    }
}

/// An artifact plus the schedule and certificate it was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Construction {
    pub artifact: DisjointTupleArtifact,
    pub schedule: TargetSchedule,
    pub certificate: SynthesisCertificate,
}

/// Disjoint hypercyclic tuple from `T = 2B`.
pub fn theorem_d_pipeline(m: usize, schedule: &TargetSchedule) -> Result<Construction> {
    theorem_d_pipeline_with(&Scalar::from_integer(2), m, schedule)
}

/// Disjoint hypercyclic tuple from `T = λB`: synthesise `(x₁, …, x_m)`,
/// map each `xⱼ` to `x = e₀`, conjugate.
///
/// An empty schedule falls back to the single target `(e₀, …, e₀)`.
pub fn theorem_d_pipeline_with(lambda: &Scalar, m: usize, schedule: &TargetSchedule) -> Result<Construction> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let schedule = if schedule.is_empty() {
        TargetSchedule::with_dyadic_tolerances(m, vec![vec![SparseVector::basis(0); m]], 0, None)?
    } else if schedule.arity() != m {
        return Err(Error::invalid(format!("schedule arity {} differs from m = {m}", schedule.arity())));
    } else {
        schedule.clone()
    };
    let certificate = synthesize(lambda, &schedule)?;
    if certificate.vectors.iter().any(SparseVector::is_zero) {
        return Err(Error::invalid("synthesis produced a zero component"));
    }
    let base = certificate.operator();
    let common = SparseVector::basis(0);
    let similarities = certificate.vectors.iter().map(|xj| transitive_map(xj, &common)).collect::<Result<Vec<_>>>()?;
    let tuple = conjugate_tuple(&base, &similarities)?;
    let artifact = DisjointTupleArtifact {
        base,
        tuple,
        common_vector: common,
        similarities,
        sources: certificate.vectors.clone(),
        scales: vec![Scalar::one(); m],
        dual: None,
    };
    if !artifact.is_consistent() {
        return Err(Error::PostconditionFailed("Sⱼxⱼ ≠ x".into()));
    }
    Ok(Construction { artifact, schedule, certificate })
}

/// `[f, f₁, …, f_m]` independent, `fⱼ(yⱼ) ≠ 0` and
/// `f(yⱼ)fⱼ(x) ≠ f(x)fⱼ(yⱼ)` for every j.
pub fn genericity_check(x: &SparseVector, f: &SparseFunctional, ys: &[SparseVector], fs: &[SparseFunctional]) -> bool {
    if ys.is_empty() || ys.len() != fs.len() {
        return false;
    }
    let mut all = vec![f.clone()];
    all.extend(fs.iter().cloned());
    if !linearly_independent(&all) {
        return false;
    }
    let fx = pair(f, x);
    ys.iter().zip(fs).all(|(y, fj)| {
        let fjy = pair(fj, y);
        !fjy.is_zero() && pair(f, y) * pair(fj, x) != &fx * &fjy
    })
}

/// Makes `(ys, fs)` generic without leaving the certificate's tolerances.
///
/// When the check already passes nothing changes. Otherwise every `yⱼ`
/// receives `δ·e_{pⱼ}` with private coordinates `pⱼ` beyond every support
/// in play (δ chosen by [`SynthesisCertificate::perturbed`]) and every `fⱼ`
/// receives `μⱼ·e_{pⱼ}*`, `μⱼδ ∈ {1, 2, 3}` picked to avoid the two
/// excluded values. The private coordinates make `f, f₁, …, f_m`
/// independent. Requires `f(x) = 1`.
pub fn repair_genericity(
    certificate: &SynthesisCertificate,
    schedule: &TargetSchedule,
    x: &SparseVector,
    f: &SparseFunctional,
    fs: &[SparseFunctional],
) -> Result<(SynthesisCertificate, Vec<SparseFunctional>)> {
    if pair(f, x) != Scalar::one() {
        return Err(Error::invalid("f(x) must equal 1"));
    }
    if fs.len() != certificate.vectors.len() {
        return Err(Error::invalid("one functional per synthesised vector required"));
    }
    if genericity_check(x, f, &certificate.vectors, fs) {
        return Ok((certificate.clone(), fs.to_vec()));
    }
    let base = certificate
        .vectors
        .iter()
        .map(SparseVector::extent)
        .chain(fs.iter().map(SparseFunctional::extent))
        .chain([x.extent(), f.extent(), certificate.horizon + 1])
        .max()
        .unwrap_or(0);
    let bumps: Vec<(usize, usize)> = (0..fs.len()).map(|j| (j, base + j)).collect();
    let (bumped, delta) = certificate.perturbed(schedule, &bumps)?;
    let fx = pair(f, x);
    let mut repaired = Vec::with_capacity(fs.len());
    for (j, fj) in fs.iter().enumerate() {
        let y = &bumped.vectors[j];
        let choice = (1..=3i64).find_map(|t| {
            let mu = Scalar::from_integer(t) / &delta;
            let mut candidate = fj.clone();
            candidate.add_scaled(&mu, &SparseFunctional::basis(base + j));
            let fjy = pair(&candidate, y);
            (!fjy.is_zero() && pair(f, y) * pair(&candidate, x) != &fx * &fjy).then_some(candidate)
        });
        repaired.push(choice.expect("at most two values of μ are excluded"));
    }
    if !genericity_check(x, f, &bumped.vectors, &repaired) {
        return Err(Error::PostconditionFailed("genericity repair did not succeed".into()));
    }
    Ok((bumped, repaired))
}

/// Dual-disjoint reduction: rescale `xⱼ = yⱼ / fⱼ(yⱼ)`, build `Sⱼ` with
/// `Sⱼxⱼ = x` and `Sⱼ′f = fⱼ`, and conjugate `T`.
pub fn theorem_s_reduction(
    base: &OperatorExpr,
    x: &SparseVector,
    f: &SparseFunctional,
    ys: &[SparseVector],
    fs: &[SparseFunctional],
) -> Result<DisjointTupleArtifact> {
    if pair(f, x) != Scalar::one() {
        return Err(Error::invalid("f(x) must equal 1"));
    }
    if !genericity_check(x, f, ys, fs) {
        return Err(Error::invalid("genericity check failed"));
    }
    let fx = pair(f, x);
    let mut scales = Vec::with_capacity(ys.len());
    let mut sources = Vec::with_capacity(ys.len());
    let mut similarities = Vec::with_capacity(ys.len());
    for (y, fj) in ys.iter().zip(fs) {
        let c = pair(fj, y).recip().expect("genericity gives fⱼ(yⱼ) ≠ 0");
        let xj = y.scaled(&c);
        if pair(f, &xj) * pair(fj, x) == &fx * pair(fj, &xj) {
            return Err(Error::invalid("f(xⱼ)fⱼ(x) = f(x)fⱼ(xⱼ)"));
        }
        let map = dual_transitive_map(&xj, x, f, fj)?;
        // (Sⱼ′)⁻¹fⱼ = f, realised as the dual of Sⱼ⁻¹
        if map.inverse_operator().dual_apply(fj) != *f {
            return Err(Error::PostconditionFailed("(Sⱼ′)⁻¹fⱼ ≠ f".into()));
        }
        scales.push(c);
        sources.push(xj);
        similarities.push(map.operator());
    }
    let tuple = conjugate_tuple(base, &similarities)?;
    let artifact = DisjointTupleArtifact {
        base: base.clone(),
        tuple,
        common_vector: x.clone(),
        similarities,
        sources,
        scales,
        dual: Some(DualData { functional: f.clone(), functionals: fs.to_vec() }),
    };
    if !artifact.is_consistent() {
        return Err(Error::PostconditionFailed("Sⱼxⱼ ≠ x".into()));
    }
    Ok(artifact)
}

/// End-to-end dual reduction on `T = λB` with `x = e₀`, `f = e₀*`.
///
/// The starting functionals are all `e_{n₁}*` (the first visit coordinate),
/// which are dependent for m ≥ 2 and vanish on some `yⱼ` in general;
/// [`repair_genericity`] makes them admissible.
pub fn theorem_s_pipeline(lambda: &Scalar, m: usize, schedule: &TargetSchedule) -> Result<Construction> {
    if m == 0 || schedule.arity() != m {
        return Err(Error::invalid("schedule arity must equal m ≥ 1"));
    }
    let certificate = synthesize(lambda, schedule)?;
    let x = SparseVector::basis(0);
    let f = SparseFunctional::basis(0);
    let first = certificate.visits[0].time;
    let fs = vec![SparseFunctional::basis(first); m];
    let (certificate, fs) = repair_genericity(&certificate, schedule, &x, &f, &fs)?;
    let artifact = theorem_s_reduction(&certificate.operator(), &x, &f, &certificate.vectors, &fs)?;
    Ok(Construction { artifact, schedule: schedule.clone(), certificate })
}
