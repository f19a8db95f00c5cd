//! Explicit hypercyclic vectors for the direct sum `(λB)^{⊕m}`, |λ| ≥ 2.
//!
//! Given an ordered list of target m-tuples `t₁, t₂, …` with tolerances
//! `ε₁ > ε₂ > …`, the synthesised vectors are
//!
//! ```text
//! xᵢ = Σₖ λ^(−nₖ) · F^(nₖ) tₖ⁽ⁱ⁾
//! ```
//!
//! with visit times `nₖ` spaced so that the blocks never overlap. Applying
//! `(λB)^(nⱼ)` then kills every earlier block, returns `tⱼ` exactly, and
//! leaves the later blocks as a tail. Because the tail blocks have disjoint
//! supports, its squared norm is exactly
//! `Σ_{k>j} |λ|^(−2(nₖ−nⱼ)) ‖tₖ‖²`, and each gap is grown until block `k`
//! uses at most `2^(−(k−j))` of every earlier budget `εⱼ²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::operators::OperatorExpr;
use crate::sparse::SparseVector;
use crate::{Error, Result, Scalar};

/// Support bound and coordinate alphabet for enumerated targets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridSpecRepr")]
pub struct GridSpec {
    dim: usize,
    coords: Vec<Scalar>,
}

#[derive(Deserialize)]
struct GridSpecRepr {
    dim: usize,
    coords: Vec<Scalar>,
}

impl TryFrom<GridSpecRepr> for GridSpec {
    type Error = Error;
    fn try_from(r: GridSpecRepr) -> Result<Self> {
        GridSpec::new(r.dim, r.coords)
    }
}

impl GridSpec {
    /// Canonicalises `coords`: duplicates removed, ordered by magnitude with
    /// the positive value before its negative.
    pub fn new(dim: usize, coords: Vec<Scalar>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("grid dimension must be positive"));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_dyadic()) {
            return Err(Error::invalid(format!("grid coordinate {c} is not dyadic")));
        }
        let mut coords = coords;
        coords.sort_by(|a, b| a.abs().cmp(&b.abs()).then(a.is_negative().cmp(&b.is_negative())));
        coords.dedup();
        if coords.iter().all(Scalar::is_zero) {
            return Err(Error::invalid("grid needs a non-zero coordinate"));
        }
        Ok(GridSpec { dim, coords })
    }

    /// `{0, ±1/2, ±1}` on `dim` coordinates.
    pub fn standard(dim: usize) -> Result<Self> {
        let h = Scalar::ratio(1, 2);
        GridSpec::new(dim, vec![Scalar::zero(), h.clone(), -h, Scalar::one(), -Scalar::one()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    fn contains(&self, v: &SparseVector) -> bool {
        v.extent() <= self.dim && v.iter().all(|(_, c)| self.coords.contains(c))
    }
}

/// An ordered finite prefix of a dense set of m-tuples, with tolerances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr")]
pub struct TargetSchedule {
    arity: usize,
    targets: Vec<Vec<SparseVector>>,
    tolerances: Vec<Scalar>,
    /// `None` for schedules that are images of a grid schedule.
    grid: Option<GridSpec>,
}

#[derive(Deserialize)]
struct ScheduleRepr {
    arity: usize,
    targets: Vec<Vec<SparseVector>>,
    tolerances: Vec<Scalar>,
    grid: Option<GridSpec>,
}

impl TryFrom<ScheduleRepr> for TargetSchedule {
    type Error = Error;
    fn try_from(r: ScheduleRepr) -> Result<Self> {
        TargetSchedule::new(r.arity, r.targets, r.tolerances, r.grid)
    }
}

impl TargetSchedule {
    pub fn new(
        arity: usize,
        targets: Vec<Vec<SparseVector>>,
        tolerances: Vec<Scalar>,
        grid: Option<GridSpec>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::invalid("tuple arity must be at least 1"));
        }
        if targets.len() != tolerances.len() {
            return Err(Error::invalid("one tolerance per target required"));
        }
        if let Some(k) = targets.iter().position(|t| t.len() != arity) {
            return Err(Error::invalid(format!("target {k} does not have arity {arity}")));
        }
        if tolerances.iter().any(|e| !e.is_positive()) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if tolerances.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("tolerances must be strictly decreasing"));
        }
        if let Some(g) = &grid {
            if targets.iter().flatten().any(|v| !g.contains(v)) {
                return Err(Error::invalid("target lies off the grid"));
            }
        }
        Ok(TargetSchedule { arity, targets, tolerances, grid })
    }

    /// Tolerances `εₖ = 2^(−(k+shift))`, k = 1, 2, …
    pub fn with_dyadic_tolerances(
        arity: usize,
        targets: Vec<Vec<SparseVector>>,
        shift: i64,
        grid: Option<GridSpec>,
    ) -> Result<Self> {
        let tolerances = (1..=targets.len() as i64).map(|k| Scalar::pow2(-(k + shift))).collect();
        TargetSchedule::new(arity, targets, tolerances, grid)
    }

    /// Same targets, tolerances re-derived as `2^(−(k+shift))`.
    pub fn reshifted(&self, shift: i64) -> Result<Self> {
        TargetSchedule::with_dyadic_tolerances(self.arity, self.targets.clone(), shift, self.grid.clone())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn targets(&self) -> &[Vec<SparseVector>] {
        &self.targets
    }

    pub fn target(&self, k: usize) -> &[SparseVector] {
        &self.targets[k]
    }

    pub fn tolerances(&self) -> &[Scalar] {
        &self.tolerances
    }

    pub fn tolerance(&self, k: usize) -> &Scalar {
        &self.tolerances[k]
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        self.grid.as_ref()
    }
}

/// The first `count` m-tuples of non-zero grid vectors in graded order.
///
/// Tuples are graded by extent (one past the largest support index over all
/// components), then by the largest coordinate magnitude, then
/// lexicographically over the component-major coordinate sequence using the
/// grid's canonical coordinate order. Tolerances are `εₖ = 2⁻ᵏ`.
pub fn enumerate_targets(grid: &GridSpec, count: usize, m: usize) -> Result<TargetSchedule> {
    if count == 0 {
        return Err(Error::invalid("target count must be at least 1"));
    }
    if m == 0 {
        return Err(Error::invalid("tuple arity must be at least 1"));
    }
    let mut magnitudes: Vec<Scalar> = grid.coords.iter().map(Scalar::abs).filter(|a| !a.is_zero()).collect();
    magnitudes.dedup();

    let mut out = Vec::with_capacity(count);
    'outer: for extent in 1..=grid.dim {
        for top in &magnitudes {
            let alphabet: Vec<&Scalar> = grid.coords.iter().filter(|c| c.abs() <= *top).collect();
            let slots = m * extent;
            let mut digits = vec![0usize; slots];
            loop {
                if let Some(tuple) = graded_candidate(&alphabet, &digits, m, extent, top) {
                    out.push(tuple);
                    if out.len() == count {
                        break 'outer;
                    }
                }
                if !advance(&mut digits, alphabet.len()) {
                    break;
                }
            }
        }
    }
    if out.len() < count {
        return Err(Error::invalid(format!("grid only holds {} admissible {m}-tuples, {count} requested", out.len())));
    }
    TargetSchedule::with_dyadic_tolerances(m, out, 0, Some(grid.clone()))
}

/// Odometer step with the last slot varying fastest; false once it wraps.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn graded_candidate(
    alphabet: &[&Scalar],
    digits: &[usize],
    m: usize,
    extent: usize,
    top: &Scalar,
) -> Option<Vec<SparseVector>> {
    let values: Vec<&Scalar> = digits.iter().map(|&d| alphabet[d]).collect();
    if !values.iter().any(|v| v.abs() == *top) {
        return None;
    }
    let tuple: Vec<SparseVector> =
        values.chunks(extent).map(|c| SparseVector::from_dense(c.iter().map(|v| (*v).clone()))).collect();
    debug_assert_eq!(tuple.len(), m);
    if tuple.iter().any(SparseVector::is_zero) {
        return None;
    }
    if tuple.iter().all(|v| v.extent() < extent) {
        return None;
    }
    Some(tuple)
}

/// One certified orbit visit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visit {
    /// Index into the schedule.
    pub target: usize,
    /// Orbit time nₖ.
    pub time: usize,
    /// Exact squared ℓ² distance of the tuple at time nₖ, summed over
    /// components.
    pub error_bound: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisCertificate {
    pub lambda: Scalar,
    pub vectors: Vec<SparseVector>,
    pub visits: Vec<Visit>,
    pub horizon: usize,
}

/// Outcome of re-running the orbit for one visit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitCheck {
    pub target: usize,
    pub time: usize,
    /// ‖(λB)^(nₖ)xᵢ − tₖ⁽ⁱ⁾‖² per component.
    pub component_dist_sq: Vec<Scalar>,
    pub within_bound: bool,
    pub within_tolerance: bool,
}

impl VisitCheck {
    pub fn passed(&self) -> bool {
        self.within_bound && self.within_tolerance
    }
}

impl SynthesisCertificate {
    pub fn operator(&self) -> OperatorExpr {
        OperatorExpr::weighted_backward_shift(self.lambda.clone())
    }

    /// Replays every component orbit and checks every visit exactly.
    pub fn verify_post_hoc(&self, schedule: &TargetSchedule) -> Result<Vec<VisitCheck>> {
        if schedule.arity() != self.vectors.len() {
            return Err(Error::invalid("schedule arity differs from certificate"));
        }
        if self.visits.iter().any(|v| v.target >= schedule.len()) {
            return Err(Error::invalid("visit refers to a target outside the schedule"));
        }
        let op = self.operator();
        let times: Vec<usize> = self.visits.iter().map(|v| v.time).collect();
        // per component: distances at each visit time
        let per_component: Vec<Vec<Scalar>> = self
            .vectors
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let mut dists = Vec::with_capacity(times.len());
                let mut orbit = op.orbit(x);
                let mut now = 0usize;
                let mut current = orbit.next().expect("orbit is infinite");
                for (visit, &t) in self.visits.iter().zip(&times) {
                    while now < t {
                        current = orbit.next().expect("orbit is infinite");
                        now += 1;
                    }
                    dists.push(current.dist_sq(&schedule.target(visit.target)[i]));
                }
                dists
            })
            .collect();
        Ok(self
            .visits
            .iter()
            .enumerate()
            .map(|(k, visit)| {
                let component_dist_sq: Vec<Scalar> = per_component.iter().map(|d| d[k].clone()).collect();
                let total: Scalar = component_dist_sq.iter().sum();
                let eps_sq = schedule.tolerance(visit.target).square();
                VisitCheck {
                    target: visit.target,
                    time: visit.time,
                    within_bound: total <= visit.error_bound,
                    within_tolerance: visit.error_bound <= eps_sq && component_dist_sq.iter().all(|d| *d <= eps_sq),
                    component_dist_sq,
                }
            })
            .collect())
    }

    pub fn is_valid_for(&self, schedule: &TargetSchedule) -> bool {
        self.visits.windows(2).all(|w| w[0].time < w[1].time)
            && self.verify_post_hoc(schedule).is_ok_and(|checks| checks.iter().all(VisitCheck::passed))
    }

    /// Adds `δ·e_p` to component `j` for every `(j, p)` in `bumps`, with
    /// `δ = 2^(−K)` for the least `K ≥ 1` that keeps every visit inside its
    /// tolerance. Every `p` must lie beyond the support of every component,
    /// so the extra term at time nₖ is exactly `|λ|^(2nₖ)·δ²` per bump.
    pub fn perturbed(&self, schedule: &TargetSchedule, bumps: &[(usize, usize)]) -> Result<(Self, Scalar)> {
        let reach = self.vectors.iter().map(SparseVector::extent).max().unwrap_or(0);
        if bumps.iter().any(|&(j, p)| j >= self.vectors.len() || p < reach.max(self.horizon + 1)) {
            return Err(Error::invalid("perturbation must sit beyond every support and the horizon"));
        }
        if bumps.is_empty() {
            return Ok((self.clone(), Scalar::zero()));
        }
        let count = Scalar::from_integer(bumps.len() as i64);
        let lambda_sq = self.lambda.square();
        // slack_k = εₖ² − ηₖ must be positive; need count·λ^(2nₖ)·4^(−K) ≤ slack_k
        let mut exponent = 1i64;
        for visit in &self.visits {
            let slack = schedule.tolerance(visit.target).square() - &visit.error_bound;
            if !slack.is_positive() {
                return Err(Error::invalid(format!("visit {} has no slack for a perturbation", visit.target)));
            }
            let growth = &count * lambda_sq.pow(visit.time as i32);
            while &growth * Scalar::pow2(-2 * exponent) > slack {
                exponent += 1;
            }
        }
        let delta = Scalar::pow2(-exponent);
        let mut vectors = self.vectors.clone();
        for &(j, p) in bumps {
            vectors[j].add_scaled(&delta, &SparseVector::basis(p));
        }
        let delta_sq = delta.square();
        let visits = self
            .visits
            .iter()
            .map(|v| Visit {
                error_bound: &v.error_bound + &count * lambda_sq.pow(v.time as i32) * &delta_sq,
                ..v.clone()
            })
            .collect();
        Ok((SynthesisCertificate { lambda: self.lambda.clone(), vectors, visits, horizon: self.horizon }, delta))
    }
}

/// Builds vectors whose `(λB)^{⊕m}` orbit visits every scheduled tuple.
pub fn synthesize(lambda: &Scalar, schedule: &TargetSchedule) -> Result<SynthesisCertificate> {
    if lambda.abs() < Scalar::from_integer(2) {
        return Err(Error::invalid(format!("|λ| must be at least 2, got {lambda}")));
    }
    if schedule.is_empty() {
        return Err(Error::invalid("empty target schedule"));
    }
    let m = schedule.arity();
    let lambda_sq = lambda.square();
    let block_norms: Vec<Scalar> =
        schedule.targets().iter().map(|t| t.iter().map(SparseVector::norm_sq).sum()).collect();
    let extents: Vec<usize> =
        schedule.targets().iter().map(|t| t.iter().map(SparseVector::extent).max().unwrap_or(0)).collect();

    let mut times: Vec<usize> = Vec::with_capacity(schedule.len());
    for k in 0..schedule.len() {
        let mut n = match k {
            0 => 1,
            _ => times[k - 1] + extents[k - 1] + 1,
        };
        if !block_norms[k].is_zero() {
            for (j, &nj) in times.iter().enumerate() {
                // want λ^(2(n − nⱼ)) ≥ ‖tₖ‖²·2^(k−j)/εⱼ²
                let need = &block_norms[k] * Scalar::pow2((k - j) as i64) / schedule.tolerance(j).square();
                let mut gap = n - nj;
                let mut reach = lambda_sq.pow(gap as i32);
                while reach < need {
                    reach *= &lambda_sq;
                    gap += 1;
                }
                n = n.max(nj + gap);
            }
        }
        times.push(n);
    }

    let vectors: Vec<SparseVector> = (0..m)
        .map(|i| {
            let mut x = SparseVector::new();
            for (k, &n) in times.iter().enumerate() {
                let weight = lambda.pow(-(n as i32));
                x.add_scaled(&weight, &schedule.target(k)[i].shifted_up(n));
            }
            x
        })
        .collect();

    let visits = (0..schedule.len())
        .map(|j| {
            let tail: Scalar = (j + 1..schedule.len())
                .filter(|&k| !block_norms[k].is_zero())
                .map(|k| &block_norms[k] * lambda_sq.pow(-((times[k] - times[j]) as i32)))
                .sum();
            Visit { target: j, time: times[j], error_bound: tail }
        })
        .collect();

    Ok(SynthesisCertificate {
        lambda: lambda.clone(),
        vectors,
        visits,
        horizon: *times.last().expect("schedule is non-empty"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> SparseVector {
        SparseVector::basis(i)
    }

    fn two() -> Scalar {
        Scalar::from_integer(2)
    }

    fn unit_grid() -> GridSpec {
        GridSpec::new(2, vec![Scalar::zero(), Scalar::one(), -Scalar::one()]).unwrap()
    }

    #[test]
    fn enumerate_smallest() {
        let grid = GridSpec::new(1, vec![Scalar::zero(), Scalar::one()]).unwrap();
        let s = enumerate_targets(&grid, 1, 1).unwrap();
        assert_eq!(s.targets(), &[vec![e(0)]]);
        assert_eq!(s.tolerance(0), &Scalar::ratio(1, 2));
    }

    #[test]
    fn enumerate_golden_pairs() {
        let s = enumerate_targets(&unit_grid(), 3, 2).unwrap();
        let ne = -&e(0);
        assert_eq!(s.targets(), &[vec![e(0), e(0)], vec![e(0), ne.clone()], vec![ne, e(0)]]);
        assert_eq!(s.tolerances(), &[Scalar::ratio(1, 2), Scalar::ratio(1, 4), Scalar::ratio(1, 8)]);
    }

    #[test]
    fn enumerate_crosses_extent() {
        // extent 1 holds 2 unit tuples for m = 1, then extent 2 starts
        let s = enumerate_targets(&unit_grid(), 4, 1).unwrap();
        assert_eq!(s.target(2), &[e(1)]);
        assert_eq!(s.target(3), &[-&e(1)]);
        assert!(enumerate_targets(&unit_grid(), 100, 1).is_err());
    }

    #[test]
    fn enumerate_rejects_zero_count() {
        assert!(enumerate_targets(&unit_grid(), 0, 1).is_err());
    }

    #[test]
    fn enumerate_is_deterministic_and_on_grid() {
        let grid = GridSpec::standard(4).unwrap();
        let a = enumerate_targets(&grid, 40, 3).unwrap();
        let b = enumerate_targets(&grid, 40, 3).unwrap();
        assert_eq!(a, b);
        let mut seen = std::collections::HashSet::new();
        for t in a.targets() {
            assert!(t.iter().all(|v| !v.is_zero()));
            assert!(seen.insert(t.clone()), "duplicate target");
        }
    }

    #[test]
    fn grid_rejects_non_dyadic() {
        assert!(GridSpec::new(2, vec![Scalar::ratio(1, 3)]).is_err());
        assert!(GridSpec::new(0, vec![Scalar::one()]).is_err());
        assert!(GridSpec::new(2, vec![Scalar::zero()]).is_err());
    }

    #[test]
    fn schedule_validation() {
        let t = vec![vec![e(0)], vec![e(1)]];
        assert!(TargetSchedule::new(1, t.clone(), vec![Scalar::ratio(1, 2), Scalar::ratio(1, 2)], None).is_err());
        assert!(TargetSchedule::new(2, t.clone(), vec![Scalar::ratio(1, 2), Scalar::ratio(1, 4)], None).is_err());
        assert!(TargetSchedule::new(1, t, vec![Scalar::ratio(1, 2)], None).is_err());
    }

    #[test]
    fn single_block() {
        let s = TargetSchedule::with_dyadic_tolerances(1, vec![vec![e(0)]], 0, None).unwrap();
        let cert = synthesize(&two(), &s).unwrap();
        assert_eq!(cert.vectors, vec![SparseVector::single(1, Scalar::ratio(1, 2))]);
        assert_eq!(cert.visits, vec![Visit { target: 0, time: 1, error_bound: Scalar::zero() }]);
        assert!(cert.is_valid_for(&s));
    }

    #[test]
    fn single_block_two_components() {
        let s = TargetSchedule::with_dyadic_tolerances(2, vec![vec![e(0), e(1)]], 0, None).unwrap();
        let cert = synthesize(&two(), &s).unwrap();
        let n = cert.visits[0].time;
        let w = Scalar::pow2(-(n as i64));
        assert_eq!(cert.vectors[0], SparseVector::single(n, w.clone()));
        assert_eq!(cert.vectors[1], SparseVector::single(n + 1, w));
        let checks = cert.verify_post_hoc(&s).unwrap();
        assert!(checks[0].component_dist_sq.iter().all(Scalar::is_zero));
    }

    #[test]
    fn two_blocks_exact_tail() {
        let s = TargetSchedule::with_dyadic_tolerances(1, vec![vec![e(0)], vec![e(1)]], 0, None).unwrap();
        assert_eq!(s.tolerance(1), &Scalar::ratio(1, 4));
        let cert = synthesize(&two(), &s).unwrap();
        let checks = cert.verify_post_hoc(&s).unwrap();
        assert!(checks.iter().all(VisitCheck::passed));
        // the a-priori tail equals the replayed distance
        for (v, c) in cert.visits.iter().zip(&checks) {
            assert_eq!(v.error_bound, c.component_dist_sq[0]);
        }
        assert!(cert.visits[0].time < cert.visits[1].time);
    }

    #[test]
    fn negative_lambda_and_bad_inputs() {
        let s = TargetSchedule::with_dyadic_tolerances(1, vec![vec![e(0)], vec![-&e(2)]], 0, None).unwrap();
        let cert = synthesize(&Scalar::from_integer(-3), &s).unwrap();
        assert!(cert.is_valid_for(&s));
        assert!(synthesize(&Scalar::ratio(3, 2), &s).is_err());
        let empty = TargetSchedule::with_dyadic_tolerances(1, vec![], 0, None).unwrap();
        assert!(synthesize(&two(), &empty).is_err());
    }

    #[test]
    fn tampered_certificate_fails() {
        let grid = GridSpec::standard(2).unwrap();
        let s = enumerate_targets(&grid, 6, 2).unwrap();
        let mut cert = synthesize(&two(), &s).unwrap();
        assert!(cert.is_valid_for(&s));
        cert.vectors[1].add_scaled(&Scalar::one(), &e(cert.visits[2].time));
        assert!(!cert.is_valid_for(&s));
    }

    #[test]
    fn perturbation_keeps_certificate() {
        let grid = GridSpec::standard(3).unwrap();
        let s = enumerate_targets(&grid, 8, 2).unwrap();
        let cert = synthesize(&two(), &s).unwrap();
        let p = cert.vectors.iter().map(SparseVector::extent).max().unwrap() + 3;
        let (bumped, delta) = cert.perturbed(&s, &[(0, p), (1, p + 1)]).unwrap();
        assert!(delta.is_positive());
        assert_eq!(bumped.vectors[0].coeff(p), delta);
        assert!(bumped.is_valid_for(&s));
        let checks = bumped.verify_post_hoc(&s).unwrap();
        for (v, c) in bumped.visits.iter().zip(&checks) {
            let total: Scalar = c.component_dist_sq.iter().sum();
            assert_eq!(total, v.error_bound);
        }
        assert!(cert.perturbed(&s, &[(0, 2)]).is_err());
    }
}
