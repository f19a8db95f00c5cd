//! Finite-horizon density reports and exact similarity audits.
//!
//! A dense orbit cannot be observed in finite time; what can be checked is
//! that the diagonal orbit `(R₁ⁿx, …, R_mⁿx)` comes within `εₖ` of every
//! scheduled tuple before a horizon, and that the conjugated orbit is
//! literally the image of the source orbit under `S₁ ⊕ … ⊕ S_m`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::DisjointTupleArtifact;
use crate::operators::{OperatorExpr, OperatorTuple};
use crate::sparse::SparseVector;
use crate::synthesis::TargetSchedule;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub target: usize,
    /// First time at which the minimum distance is attained.
    pub best_time: usize,
    pub best_dist_sq: Scalar,
    pub first_pass: Option<usize>,
    pub pass: bool,
    /// Visit time promised by a synthesis certificate, if supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_time: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass_at_certified_time: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub tuple: String,
    pub horizon: usize,
    pub records: Vec<OrbitRecord>,
    pub verdict: bool,
}

impl OrbitReport {
    /// Plain-text table; distances shown as approximate powers of two.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "orbit report: {} (horizon {})", self.tuple, self.horizon);
        let _ = writeln!(
            out,
            "{:>6}  {:>8}  {:>10}  {:>10}  {:>8}  result",
            "target", "best n", "dist²", "first pass", "cert n"
        );
        for r in &self.records {
            let first = r.first_pass.map_or("-".into(), |n| n.to_string());
            let cert = r.certified_time.map_or("-".into(), |n| n.to_string());
            let status = match (r.pass, r.pass_at_certified_time) {
                (false, _) => "FAIL",
                (true, Some(false)) => "pass (other n)",
                (true, _) => "pass",
            };
            let _ = writeln!(
                out,
                "{:>6}  {:>8}  {:>10}  {:>10}  {:>8}  {status}",
                r.target,
                r.best_time,
                approx_pow2(&r.best_dist_sq),
                first,
                cert
            );
        }
        let _ = writeln!(out, "verdict: {}", if self.verdict { "PASS" } else { "FAIL" });
        out
    }
}

fn approx_pow2(s: &Scalar) -> String {
    if s.is_zero() {
        return "0".into();
    }
    let bits = s.numer().bits() as i64 - s.denom().bits() as i64;
    format!("~2^{bits}")
}

/// [`orbit_report_with_times`] without certificate times.
pub fn orbit_report(
    tuple: &OperatorTuple,
    x: &SparseVector,
    schedule: &TargetSchedule,
    horizon: usize,
) -> Result<OrbitReport> {
    orbit_report_with_times(tuple, x, schedule, horizon, None)
}

/// Walks `n = 0..=horizon`, tracking for each target the exact minimum of
/// `Σᵢ ‖Rᵢⁿx − tᵢ‖²` and the first `n` at which it drops to `εₖ²`.
///
/// `certified_times[k]`, when given, is the time a certificate promised for
/// target `k`; the record then also says whether that exact time passes.
pub fn orbit_report_with_times(
    tuple: &OperatorTuple,
    x: &SparseVector,
    schedule: &TargetSchedule,
    horizon: usize,
    certified_times: Option<&[usize]>,
) -> Result<OrbitReport> {
    let m = tuple.len();
    if schedule.arity() != m {
        return Err(Error::invalid(format!("schedule arity {} differs from tuple length {m}", schedule.arity())));
    }
    if certified_times.is_some_and(|t| t.len() != schedule.len()) {
        return Err(Error::invalid("one certified time per target required"));
    }
    let eps_sq: Vec<Scalar> = schedule.tolerances().iter().map(Scalar::square).collect();
    let mut best: Vec<Option<(usize, Scalar)>> = vec![None; schedule.len()];
    let mut first_pass: Vec<Option<usize>> = vec![None; schedule.len()];
    let mut at_certified: Vec<Option<bool>> = vec![None; schedule.len()];

    // ‖r − t‖² = ‖r‖² − 2⟨r, t⟩ + ‖t‖², with ‖t‖² summed once per target
    let target_norms: Vec<Scalar> =
        schedule.targets().iter().map(|t| t.iter().map(SparseVector::norm_sq).sum()).collect();
    let two = Scalar::from_integer(2);

    let mut current: Vec<SparseVector> = vec![x.clone(); m];
    for n in 0..=horizon {
        let orbit_norm: Scalar = current.iter().map(SparseVector::norm_sq).sum();
        let dists: Vec<Scalar> = schedule
            .targets()
            .par_iter()
            .zip(&target_norms)
            .map(|(t, t_norm)| {
                let cross: Scalar = current.iter().zip(t).map(|(r, ti)| r.dot(ti)).sum();
                &orbit_norm + t_norm - &two * cross
            })
            .collect();
        for (k, d) in dists.into_iter().enumerate() {
            let passes = d <= eps_sq[k];
            if passes && first_pass[k].is_none() {
                first_pass[k] = Some(n);
            }
            if certified_times.is_some_and(|t| t[k] == n) {
                at_certified[k] = Some(passes);
            }
            if best[k].as_ref().is_none_or(|(_, b)| d < *b) {
                best[k] = Some((n, d));
            }
        }
        if n < horizon {
            current = current.par_iter().zip(tuple.ops()).map(|(v, op)| op.apply(v)).collect();
        }
    }

    let records: Vec<OrbitRecord> = best
        .into_iter()
        .enumerate()
        .map(|(k, b)| {
            let (best_time, best_dist_sq) = b.expect("horizon range is non-empty");
            let certified_time = certified_times.map(|t| t[k]);
            OrbitRecord {
                target: k,
                best_time,
                best_dist_sq,
                first_pass: first_pass[k],
                pass: first_pass[k].is_some(),
                certified_time,
                // a certified time beyond the horizon was never reached
                pass_at_certified_time: certified_time.map(|_| at_certified[k].unwrap_or(false)),
            }
        })
        .collect();
    let verdict = records.iter().all(|r| r.pass);
    Ok(OrbitReport { tuple: format!("{m}-tuple"), horizon, records, verdict })
}

/// Images `Sⱼ(cⱼ·tₖ⁽ʲ⁾)` of a schedule, with tolerances widened so that a
/// pass for the source orbit implies a pass for the image.
///
/// With `Kⱼ ≥ cⱼ²‖Sⱼ‖²` from [`OperatorExpr::norm_sq_bound`], each tolerance
/// is multiplied by the least `2^p` with `4^p ≥ maxⱼ Kⱼ`, which keeps
/// tolerances dyadic.
pub fn conjugate_schedule(
    schedule: &TargetSchedule,
    similarities: &[OperatorExpr],
    scales: &[Scalar],
) -> Result<TargetSchedule> {
    if similarities.len() != schedule.arity() || scales.len() != schedule.arity() {
        return Err(Error::invalid("one similarity and scale per component required"));
    }
    let lipschitz_sq = similarities
        .iter()
        .zip(scales)
        .map(|(s, c)| s.norm_sq_bound() * c.square())
        .max()
        .expect("arity is at least 1");
    let mut p = 0i64;
    while Scalar::pow2(2 * p) < lipschitz_sq {
        p += 1;
    }
    let widen = Scalar::pow2(p);
    let targets = schedule
        .targets()
        .par_iter()
        .map(|t| t.iter().zip(similarities.iter().zip(scales)).map(|(ti, (s, c))| s.apply(&ti.scaled(c))).collect())
        .collect();
    let tolerances = schedule.tolerances().iter().map(|e| e * &widen).collect();
    TargetSchedule::new(schedule.arity(), targets, tolerances, None)
}

/// `Rⱼⁿx = Sⱼ(Tⁿxⱼ)` exactly for every j and every `n ≤ horizon`.
pub fn similarity_audit(artifact: &DisjointTupleArtifact, horizon: usize) -> bool {
    let m = artifact.tuple.len();
    if artifact.similarities.len() != m || artifact.sources.len() != m {
        return false;
    }
    (0..m).into_par_iter().all(|j| {
        let r = &artifact.tuple.ops()[j];
        let s = &artifact.similarities[j];
        r.orbit(&artifact.common_vector)
            .zip(artifact.base.orbit(&artifact.sources[j]))
            .take(horizon + 1)
            .all(|(lhs, src)| lhs == s.apply(&src))
    })
}

/// `(Rⱼ′)ⁿf = (Sⱼ⁻¹)′((T′)ⁿfⱼ)` exactly for every j and every `n ≤ horizon`.
pub fn dual_similarity_audit(artifact: &DisjointTupleArtifact, horizon: usize) -> Result<bool> {
    let dual = artifact.dual.as_ref().ok_or_else(|| Error::invalid("artifact carries no dual data"))?;
    let m = artifact.tuple.len();
    if artifact.similarities.len() != m || dual.functionals.len() != m {
        return Ok(false);
    }
    let inverses: Vec<OperatorExpr> = match artifact.similarities.iter().map(OperatorExpr::inverse).collect() {
        Ok(v) => v,
        Err(_) => return Ok(false),
    };
    Ok((0..m).into_par_iter().all(|j| {
        let r = &artifact.tuple.ops()[j];
        let mut lhs = dual.functional.clone();
        let mut src = dual.functionals[j].clone();
        for n in 0..=horizon {
            if lhs != inverses[j].dual_apply(&src) {
                return false;
            }
            if n < horizon {
                lhs = r.dual_apply(&lhs);
                src = artifact.base.dual_apply(&src);
            }
        }
        true
    }))
}
